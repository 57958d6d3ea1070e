#![allow(dead_code)]

use kanon::{
    Attribute, AttributeRole, AttributeSchema, Dataset, Hierarchies, MaskRule, TaxonomyTree,
};
use proptest::prelude::*;

pub const GENDERS: [&str; 2] = ["Male", "Female"];
pub const DISEASES: [&str; 6] = [
    "Flu",
    "Hepatitis",
    "Diabetes",
    "Cancer",
    "Asthma",
    "Measles",
];
pub const ZIPS: [&str; 4] = ["443350", "443351", "443352", "553310"];

/// (age, gender index, zip index, disease index)
pub type Row = (u32, usize, usize, usize);

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

pub fn dataset(rows: &[Row]) -> Dataset {
    let rows = rows.iter().map(|&(age, g, z, d)| {
        [
            age.to_string(),
            GENDERS[g % 2].to_string(),
            ZIPS[z % ZIPS.len()].to_string(),
            DISEASES[d % DISEASES.len()].to_string(),
        ]
    });
    Dataset::from_rows(schema(), rows).unwrap()
}

pub fn gender_tree() -> TaxonomyTree {
    TaxonomyTree::from_edges([("Person", "Male"), ("Person", "Female")], None).unwrap()
}

/// Gender and zip generalized in every cluster.
pub fn always() -> Hierarchies {
    Hierarchies::new()
        .with_tree("Gender", gender_tree())
        .with_always_generalize("Gender")
        .with_always_generalize("Zip code")
}

/// Generalize only heterogeneous clusters.
pub fn need_based() -> Hierarchies {
    Hierarchies::new().with_tree("Gender", gender_tree())
}

pub fn table1_rows() -> Vec<Row> {
    vec![
        (25, 0, 0, 2),
        (26, 0, 1, 3),
        (27, 0, 2, 0),
        (36, 0, 0, 1),
        (40, 1, 0, 1),
        (39, 1, 0, 1),
    ]
}

pub fn row_strategy(sensitive_values: usize) -> impl Strategy<Value = Row> {
    (
        18u32..70,
        0usize..2,
        0usize..ZIPS.len(),
        0usize..sensitive_values,
    )
}

pub fn rows_strategy(max_n: usize, sensitive_values: usize) -> impl Strategy<Value = Vec<Row>> {
    prop::collection::vec(row_strategy(sensitive_values), 1..=max_n)
}
