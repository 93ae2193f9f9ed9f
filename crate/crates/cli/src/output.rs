use padic_gas::scalar::format_f64;
use serde::Serialize;
use serde_json::Value;

use crate::params::{CliError, CliResult, Format, Params};

/// Rows for the CSV rendering of a result.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Table {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Output {
    pub result: Value,
    pub table: Table,
}

impl Output {
    pub fn new(result: impl Serialize, table: Table) -> CliResult<Output> {
        Ok(Output {
            result: to_value(result)?,
            table,
        })
    }
}

pub fn to_value(x: impl Serialize) -> CliResult<Value> {
    serde_json::to_value(x).map_err(|e| CliError::Failed(format!("serialization: {e}")))
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    params: &'a Params,
    result: &'a Value,
}

/// Rewrites every non-integer number with 17 significant digits.
fn normalize_floats(v: &mut Value) {
    match v {
        Value::Number(num) if num.as_i64().is_none() && num.as_u64().is_none() => {
            if let Some(x) = num.to_string().parse::<f64>().ok().filter(|x| x.is_finite()) {
                if let Ok(fixed) = format_f64(x).parse::<serde_json::Number>() {
                    *num = fixed;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(normalize_floats),
        Value::Object(map) => map.values_mut().for_each(normalize_floats),
        _ => {}
    }
}

pub fn render(command: &str, params: &Params, out: &Output, format: Format) -> CliResult<String> {
    match format {
        Format::Json => {
            let mut result = out.result.clone();
            normalize_floats(&mut result);
            let report = Report {
                command,
                params,
                result: &result,
            };
            let mut text = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Failed(format!("serialization: {e}")))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let params = serde_json::to_string(params).map_err(|e| CliError::Failed(e.to_string()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&out.table.header).map_err(csv_err)?;
            for row in &out.table.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            let body = w.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
            let body = String::from_utf8(body).map_err(|e| CliError::Failed(e.to_string()))?;
            Ok(format!("# command={command}\n# params={params}\n{body}"))
        }
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Failed(format!("csv: {e}"))
}
