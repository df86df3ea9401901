//! Hyperparameter overrides from `--hp key=value` flags and JSON tables.
//!
//! A flag may name its teacher (`adr.t_H=180`); a bare key applies to the
//! single teacher being run. Tables map teacher names to key/value objects:
//! `{"adr": {"t_H": 180}, "alp-gmm": {"n": 200}}`.

use std::path::Path;

use acl_core::teacher::{HyperParams, TeacherKind};
use serde_json::Value;

use crate::error::{BenchError, BenchResult};

/// One parsed `--hp` flag.
#[derive(Debug, Clone, PartialEq)]
pub struct HpFlag {
    pub teacher: Option<TeacherKind>,
    pub key: String,
    pub value: f64,
}

impl std::str::FromStr for HpFlag {
    type Err = BenchError;

    fn from_str(s: &str) -> BenchResult<Self> {
        let (lhs, rhs) = s.split_once('=').ok_or_else(|| BenchError::Argument(format!("`{s}` is not key=value")))?;
        let value = match rhs.trim() {
            "true" => 1.0,
            "false" => 0.0,
            v => v.parse().map_err(|_| BenchError::Argument(format!("`{v}` is not a number")))?,
        };
        let (teacher, key) = match lhs.split_once('.') {
            Some((t, k)) => (Some(t.trim().parse::<TeacherKind>()?), k),
            None => (None, lhs),
        };
        Ok(HpFlag { teacher, key: key.trim().to_string(), value })
    }
}

/// Applies flags to `hp` for a run of `teachers`.
pub fn apply_flags(hp: &mut HyperParams, teachers: &[TeacherKind], flags: &[HpFlag]) -> BenchResult<()> {
    for f in flags {
        let teacher = match (f.teacher, teachers) {
            (Some(t), _) => t,
            (None, [only]) => *only,
            (None, _) => {
                return Err(BenchError::Argument(format!(
                    "`{}` is ambiguous with several teachers; write teacher.{}",
                    f.key, f.key
                )))
            }
        };
        hp.set(teacher, &f.key, f.value)?;
    }
    Ok(())
}

pub fn apply_table(hp: &mut HyperParams, table: &Value) -> BenchResult<()> {
    let obj = table.as_object().ok_or_else(|| BenchError::Argument("hyperparameter table must be an object".into()))?;
    for (name, entries) in obj {
        let teacher: TeacherKind = name.parse()?;
        let entries = entries
            .as_object()
            .ok_or_else(|| BenchError::Argument(format!("entry `{name}` must be an object")))?;
        for (key, v) in entries {
            let value = match v {
                Value::Number(n) => n.as_f64().expect("finite JSON number"),
                Value::Bool(b) => f64::from(u8::from(*b)),
                _ => return Err(BenchError::Argument(format!("{name}.{key} must be a number or boolean"))),
            };
            hp.set(teacher, key, value)?;
        }
    }
    Ok(())
}

pub fn load_table(path: &Path) -> BenchResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json { path: path.display().to_string(), line: 0, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use acl_core::AclError;

    #[test]
    fn parses_flags() {
        let f: HpFlag = "adr.t_H=150".parse().unwrap();
        assert_eq!(f, HpFlag { teacher: Some(TeacherKind::Adr), key: "t_H".into(), value: 150.0 });
        let f: HpFlag = "positive_only=true".parse().unwrap();
        assert_eq!((f.teacher, f.value), (None, 1.0));
        assert!("t_H".parse::<HpFlag>().is_err());
        assert!("t_H=abc".parse::<HpFlag>().is_err());
    }

    #[test]
    fn bare_keys_need_a_single_teacher() {
        let mut hp = HyperParams::default();
        let flags = vec!["n=200".parse().unwrap()];
        apply_flags(&mut hp, &[TeacherKind::AlpGmm], &flags).unwrap();
        assert_eq!(hp.alp_gmm.fit_rate, 200);
        assert!(apply_flags(&mut hp, &[TeacherKind::AlpGmm, TeacherKind::Riac], &flags).is_err());
    }

    #[test]
    fn table_sets_values_and_rejects_unknown_keys() {
        let mut hp = HyperParams::default();
        let t = serde_json::json!({"adr": {"t_H": 170, "p_b": 0.5}, "covar-gmm": {"positive_only": true}});
        apply_table(&mut hp, &t).unwrap();
        assert_eq!((hp.adr.t_high, hp.adr.boundary_prob), (170.0, 0.5));
        assert!(hp.covar_positive_only);
        let err = apply_table(&mut hp, &serde_json::json!({"adr": {"bogus": 1}})).unwrap_err();
        assert!(matches!(err, BenchError::Core(AclError::UnknownHyperParameter { .. })));
        assert_eq!(err.exit_code(), 2);
    }
}
