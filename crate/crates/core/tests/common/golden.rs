//! Golden CLI invocations, shared by the CLI suite and the acceptance run.

use std::path::{Path, PathBuf};

use multimatch::cli::{run, Output};

pub fn root() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> String {
    root().join("fixtures").join(name).display().to_string()
}

pub fn cli(args: &[&str]) -> Output {
    run(std::iter::once("multimatch").chain(args.iter().copied()))
}

/// Name, fixture file (empty for none), subcommand and flags.
pub const GOLDEN: &[(&str, &str, &[&str])] = &[
    ("check_market1", "market1.market", &["check"]),
    (
        "audit_market1_x",
        "market1.market",
        &["audit", "--outcome", "{x}"],
    ),
    (
        "audit_market1_empty",
        "market1.market",
        &["audit", "--outcome", "{}"],
    ),
    (
        "audit_market2_y",
        "market2.market",
        &["audit", "--outcome", "{y}"],
    ),
    (
        "audit_market2_y_structured",
        "market2.market",
        &["audit", "--outcome", "{y}", "--format", "structured"],
    ),
    (
        "audit_market4_yzu",
        "market4.market",
        &["audit", "--outcome", "{y,z,u}"],
    ),
    (
        "audit_market4_yzu_structured",
        "market4.market",
        &["audit", "--outcome", "{y,z,u}", "--format", "structured"],
    ),
    ("conditions_market1", "market1.market", &["conditions"]),
    ("conditions_market2", "market2.market", &["conditions"]),
    ("conditions_market4", "market4.market", &["conditions"]),
    (
        "conditions_market4_structured",
        "market4.market",
        &["conditions", "--format", "structured"],
    ),
    ("conditions_market5", "market5.market", &["conditions"]),
    (
        "csd_market3_forward",
        "market3.market",
        &["csd", "--order", "i1,i2,i3"],
    ),
    (
        "csd_market3_reverse",
        "market3.market",
        &["csd", "--order", "i3,i2,i1"],
    ),
    (
        "csd_market3_structured",
        "market3.market",
        &["csd", "--order", "i1,i2,i3", "--format", "structured"],
    ),
    (
        "csd_market5",
        "market5.market",
        &["csd", "--order", "Ana,Bob,Carol"],
    ),
    (
        "csd_market5_seed",
        "market5.market",
        &["csd", "--seed", "7"],
    ),
    ("ir_market4", "market4.market", &["ir"]),
    ("efficient_market1", "market1.market", &["efficient"]),
    ("efficient_market2", "market2.market", &["efficient"]),
    (
        "efficient_market2_structured",
        "market2.market",
        &["efficient", "--format", "structured"],
    ),
    ("compile_bilateral", "bilateral.atm", &["compile-atm"]),
    (
        "random_seed42",
        "",
        &[
            "random",
            "--seed",
            "42",
            "--agents",
            "3",
            "--contracts",
            "4",
        ],
    ),
];

pub fn golden_args(file: &str, rest: &[&str]) -> Vec<String> {
    let mut args: Vec<String> = vec![rest[0].to_owned()];
    if !file.is_empty() {
        args.push(fixture(file));
    }
    args.extend(rest[1..].iter().map(|s| s.to_string()));
    args
}

pub fn golden_path(name: &str) -> PathBuf {
    root()
        .join("tests")
        .join("golden")
        .join(format!("{name}.txt"))
}
