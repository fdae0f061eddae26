//! Renders the capability matrix: one row per implemented variant with its
//! main trait and the counting / deletion / false-negative / result columns,
//! plus a footnote naming the variants that are not implemented.

use bfsk::api::{capability_matrix, ResultKind, UNIMPLEMENTED_VARIANTS};
use serde_json::json;

use crate::error::CliError;

fn yes_no(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}

fn result_kind(kind: ResultKind) -> &'static str {
    match kind {
        ResultKind::Boolean => "boolean",
        ResultKind::Frequency => "frequency",
        ResultKind::BooleanAndFrequency => "boolean+frequency",
    }
}

pub fn render_csv() -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "variant",
        "main_trait",
        "counting",
        "deletion",
        "false_negatives",
        "result",
    ])?;
    for row in capability_matrix() {
        let caps = row.capabilities;
        writer.write_record([
            row.variant.name(),
            row.main_trait,
            yes_no(caps.counting),
            yes_no(caps.deletion),
            yes_no(caps.false_negatives_possible),
            result_kind(caps.result),
        ])?;
    }
    let mut out = String::from_utf8(writer.into_inner().expect("vec sink cannot fail"))
        .expect("csv output is utf-8");
    out.push_str(&format!(
        "# not implemented: {}\n",
        UNIMPLEMENTED_VARIANTS.join(", ")
    ));
    Ok(out)
}

pub fn render_json() -> Result<String, CliError> {
    let rows: Vec<serde_json::Value> = capability_matrix()
        .into_iter()
        .map(|row| {
            let caps = row.capabilities;
            json!({
                "variant": row.variant.name(),
                "main_trait": row.main_trait,
                "counting": caps.counting,
                "deletion": caps.deletion,
                "false_negatives": caps.false_negatives_possible,
                "result": result_kind(caps.result),
            })
        })
        .collect();
    let doc = json!({
        "rows": rows,
        "not_implemented": UNIMPLEMENTED_VARIANTS,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}
