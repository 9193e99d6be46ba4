//! One ordered list of named values, rendered either as `key: value` lines
//! or as a flat JSON object, so both forms always carry the same numbers.

use std::io::Write;

use kleinbarrier::units;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Units {
    /// ħ = c = 1
    Natural,
    /// Energies read as MeV; lengths and times also shown in pm and s
    EvPm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    None,
    Energy,
    Length,
    Time,
}

#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<(String, Value, Dim)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn text(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries
            .push((key.to_string(), Value::String(value.into()), Dim::None));
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.quantity(key, value, Dim::None)
    }

    pub fn opt(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        match value {
            Some(x) => self.num(key, x),
            None => {
                self.entries.push((key.to_string(), Value::Null, Dim::None));
                self
            }
        }
    }

    pub fn int(&mut self, key: &str, value: i64) -> &mut Self {
        self.entries
            .push((key.to_string(), Value::from(value), Dim::None));
        self
    }

    pub fn quantity(&mut self, key: &str, value: f64, dim: Dim) -> &mut Self {
        let v = serde_json::Number::from_f64(value).map_or(Value::Null, Value::Number);
        self.entries.push((key.to_string(), v, dim));
        self
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (k, v, _) in &self.entries {
            map.insert(k.clone(), v.clone());
        }
        Value::Object(map)
    }

    pub fn render_human(&self, units: Units) -> String {
        let width = self
            .entries
            .iter()
            .map(|(k, _, _)| k.len())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for (k, v, dim) in &self.entries {
            let value = match v {
                Value::Null => "n/a".to_string(),
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                other => other.to_string(),
            };
            let suffix = match (units, dim, v.as_f64()) {
                (Units::EvPm, Dim::Energy, Some(_)) => " MeV".to_string(),
                (Units::EvPm, Dim::Length, Some(x)) => {
                    format!(" MeV⁻¹ (= {} pm)", units::length_pm(x))
                }
                (Units::EvPm, Dim::Time, Some(x)) => format!(" MeV⁻¹ (= {} s)", units::time_s(x)),
                _ => String::new(),
            };
            out.push_str(&format!("{k:<width$} : {value}{suffix}\n"));
        }
        out
    }

    pub fn write(&self, json: bool, units: Units, sink: &mut dyn Write) -> std::io::Result<()> {
        if json {
            let text = serde_json::to_string_pretty(&self.to_json()).expect("report is valid JSON");
            writeln!(sink, "{text}")
        } else {
            sink.write_all(self.render_human(units).as_bytes())
        }
    }
}
