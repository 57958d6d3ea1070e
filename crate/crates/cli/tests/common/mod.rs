#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kanon::{
    Attribute, AttributeRole, AttributeSchema, Dataset, Hierarchies, MaskRule, TaxonomyTree,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

pub fn table1_config() -> PathBuf {
    repo_path("data/table1/config.toml")
}

pub fn kanon<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_kanon"))
        .args(args)
        .output()
        .expect("failed to start kanon")
}

pub const GENDERS: [&str; 2] = ["Male", "Female"];
pub const DISEASES: [&str; 10] = [
    "Flu",
    "Hepatitis",
    "Diabetes",
    "Cancer",
    "Asthma",
    "Measles",
    "Malaria",
    "Typhoid",
    "Gout",
    "Mumps",
];
pub const ZIPS: [&str; 4] = ["443350", "443351", "443352", "553310"];

pub fn schema() -> AttributeSchema {
    AttributeSchema::new(vec![
        Attribute::new("Age", AttributeRole::QuasiNumeric),
        Attribute::new("Gender", AttributeRole::QuasiCategorical).with_taxonomy("gender.csv"),
        Attribute::new("Zip code", AttributeRole::QuasiCategorical)
            .with_mask(MaskRule::new(2, '*')),
        Attribute::new("Disease", AttributeRole::Sensitive),
    ])
    .unwrap()
}

pub fn gender_tree() -> TaxonomyTree {
    TaxonomyTree::from_edges([("Person", "Male"), ("Person", "Female")], None).unwrap()
}

pub fn always() -> Hierarchies {
    Hierarchies::new()
        .with_tree("Gender", gender_tree())
        .with_always_generalize("Gender")
        .with_always_generalize("Zip code")
}

pub fn need_based() -> Hierarchies {
    Hierarchies::new().with_tree("Gender", gender_tree())
}

/// Random rows of (age, gender, zip, disease) over `sensitive_values` diseases.
pub fn random_rows(rng: &mut StdRng, n: usize, sensitive_values: usize) -> Vec<[String; 4]> {
    (0..n)
        .map(|_| {
            [
                rng.gen_range(18..70u32).to_string(),
                GENDERS[rng.gen_range(0..2)].to_string(),
                ZIPS[rng.gen_range(0..ZIPS.len())].to_string(),
                DISEASES[rng.gen_range(0..sensitive_values)].to_string(),
            ]
        })
        .collect()
}

pub fn random_dataset(rng: &mut StdRng, n: usize, sensitive_values: usize) -> Dataset {
    Dataset::from_rows(schema(), random_rows(rng, n, sensitive_values)).unwrap()
}

/// Occupation counts of the 32,561-row Adult training file.
pub const ADULT_OCCUPATIONS: [(&str, usize); 15] = [
    ("Prof-specialty", 4140),
    ("Craft-repair", 4099),
    ("Exec-managerial", 4066),
    ("Adm-clerical", 3770),
    ("Sales", 3650),
    ("Other-service", 3295),
    ("Machine-op-inspct", 2002),
    ("?", 1843),
    ("Transport-moving", 1597),
    ("Handlers-cleaners", 1370),
    ("Farming-fishing", 994),
    ("Tech-support", 928),
    ("Protective-serv", 649),
    ("Priv-house-serv", 149),
    ("Armed-Forces", 9),
];
pub const ADULT_MALES: usize = 21790;
pub const ADULT_ROWS: usize = 32561;

/// Headerless file in the adult.data layout with Adult's occupation and sex
/// marginals and a clipped-normal age column (17–90).
pub fn write_synthetic_adult(path: &Path, seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut occupations: Vec<&str> = ADULT_OCCUPATIONS
        .iter()
        .flat_map(|&(o, c)| std::iter::repeat_n(o, c))
        .collect();
    occupations.shuffle(&mut rng);
    let mut sexes: Vec<&str> = std::iter::repeat_n("Male", ADULT_MALES)
        .chain(std::iter::repeat_n("Female", ADULT_ROWS - ADULT_MALES))
        .collect();
    sexes.shuffle(&mut rng);

    let mut out = std::io::BufWriter::new(std::fs::File::create(path).unwrap());
    for (occupation, sex) in occupations.iter().zip(&sexes) {
        // Box-Muller, mean 38.6, sd 13.6.
        let (u1, u2): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        let age = (38.6 + 13.6 * z).round().clamp(17.0, 90.0) as u32;
        writeln!(
            out,
            "{age}, Private, {}, Bachelors, 13, Never-married, {occupation}, Not-in-family, White, {sex}, 0, 0, 40, United-States, <=50K",
            rng.gen_range(20000..500000u32)
        )
        .unwrap();
    }
    out.flush().unwrap();
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}
