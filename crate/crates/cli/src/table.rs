//! Tabular output. Cells are preformatted strings (floats use Rust's
//! shortest round-trip formatting); the JSON rendering re-types cells that
//! parse as numbers so downstream tools get real numerics.

use serde_json::{Map, Number, Value};

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width mismatch");
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let arr: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                for (k, cell) in self.header.iter().zip(r) {
                    let v = match cell.parse::<f64>() {
                        Ok(x) if x.is_finite() => {
                            Number::from_f64(x).map(Value::Number).unwrap_or_else(|| {
                                Value::String(cell.clone())
                            })
                        }
                        _ => Value::String(cell.clone()),
                    };
                    obj.insert((*k).to_string(), v);
                }
                Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&arr).expect("rows serialize");
        out.push('\n');
        out
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            self.to_json()
        } else {
            self.to_csv()
        }
    }
}
