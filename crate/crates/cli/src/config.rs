//! The `hbl-config/1` JSON document and its resolution into a model
//! configuration. Numbers may be given as JSON numbers, decimal strings or
//! fractions such as "1/3"; all are parsed from their text at full precision.

use std::path::Path;

use hbl_core::model::{BrownianConfig, Temperature};
use hbl_core::numerics::{clamp_precision, Real, DEFAULT_PRECISION};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;

pub const SCHEMA: &str = "hbl-config/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Text(String),
    Number(serde_json::Number),
}

impl Decimal {
    pub fn text(&self) -> String {
        match self {
            Decimal::Text(s) => s.trim().to_string(),
            Decimal::Number(n) => n.to_string(),
        }
    }

    /// A decimal, or a fraction `p/q` of two decimals.
    fn parse(&self, field: &str, prec: u32) -> Result<Real, CliError> {
        let s = self.text();
        let bad = || CliError::config(format!("{field}: {s:?} is not a decimal number or fraction"));
        let one = |x: &str| Real::parse(x.trim(), prec).map_err(|_| bad());
        match s.split_once('/') {
            None => one(&s),
            Some((p, q)) => {
                let q = one(q)?;
                if q.is_zero() {
                    return Err(bad());
                }
                Ok(one(p)? / q)
            }
        }
    }
}

impl From<&str> for Decimal {
    fn from(s: &str) -> Self {
        Decimal::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub a: [Decimal; 2],
    pub b: [Decimal; 2],
    pub p: [Decimal; 2],
    /// Fixed temperature `T`; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<Decimal>,
    /// Double scaling `T_n = 1 + L n^(-2/3)`; excludes `temperature`.
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Decimal>,
    /// Explicit inverse variance `N`.
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n_scale: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

impl ConfigFile {
    /// Two groups starting at ±1 and ending at ±0.7 with equal fractions,
    /// `T = 1`: large separation.
    pub fn builtin() -> Self {
        ConfigFile {
            schema: SCHEMA.into(),
            name: Some("default".into()),
            a: ["1".into(), "-1".into()],
            b: ["0.7".into(), "-0.7".into()],
            p: ["0.5".into(), "0.5".into()],
            temperature: None,
            l: None,
            n_scale: None,
            t: None,
            precision: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let file: ConfigFile = serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if file.schema != SCHEMA {
            return Err(CliError::config(format!("unsupported schema {:?}, expected {SCHEMA:?}", file.schema)));
        }
        Ok(file)
    }
}

/// A configuration resolved at the working precision.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub file: ConfigFile,
    pub prec: u32,
    pub model: BrownianConfig,
    pub l: Option<Real>,
    pub t: Real,
}

pub struct Overrides {
    pub precision: Option<u32>,
    pub t: Option<String>,
    pub l: Option<String>,
}

impl RunConfig {
    pub fn resolve(file: ConfigFile, ov: &Overrides) -> Result<Self, CliError> {
        let prec = clamp_precision(ov.precision.or(file.precision).unwrap_or(DEFAULT_PRECISION));
        let pair = |v: &[Decimal; 2], f: &str| -> Result<[Real; 2], CliError> {
            Ok([v[0].parse(&format!("{f}1"), prec)?, v[1].parse(&format!("{f}2"), prec)?])
        };
        let l = match (&ov.l, &file.l) {
            (Some(s), _) => Some(Decimal::Text(s.clone()).parse("L", prec)?),
            (None, Some(d)) => Some(d.parse("L", prec)?),
            (None, None) => None,
        };
        let temperature = match (&l, &file.temperature) {
            (Some(_), Some(_)) if ov.l.is_none() => {
                return Err(CliError::config("temperature and L are mutually exclusive".into()));
            }
            (Some(l), _) => Temperature::DoubleScaling { l: l.clone() },
            (None, Some(d)) => Temperature::Fixed(d.parse("temperature", prec)?),
            (None, None) => Temperature::Fixed(Real::one(prec)),
        };
        let mut model = BrownianConfig::new(pair(&file.a, "a")?, pair(&file.b, "b")?, pair(&file.p, "p")?, temperature)?;
        if let Some(n) = &file.n_scale {
            model = model.with_scale(n.parse("N", prec)?)?;
        }
        let t = match (&ov.t, &file.t) {
            (Some(s), _) => Decimal::Text(s.clone()).parse("t", prec)?,
            (None, Some(d)) => d.parse("t", prec)?,
            (None, None) => Real::ratio(1, 2, prec),
        };
        if t <= 0.0 || t >= 1.0 {
            return Err(CliError::config(format!("t = {} must lie in (0, 1)", t.to_string_digits(12))));
        }
        Ok(RunConfig { file, prec, model, l, t })
    }

    /// The input echoed with the values actually used.
    pub fn echo(&self) -> Value {
        let digits = crate::output::digits_for(self.prec);
        let s = |x: &Real| x.to_string_digits(digits);
        let m = &self.model;
        let temperature = match &m.temperature {
            Temperature::Fixed(t) => json!({ "fixed": s(t) }),
            Temperature::DoubleScaling { l } => json!({ "double_scaling_L": s(l) }),
        };
        json!({
            "input": serde_json::to_value(&self.file).expect("serializable"),
            "resolved": {
                "precision": self.prec,
                "a": [s(&m.a[0]), s(&m.a[1])],
                "b": [s(&m.b[0]), s(&m.b[1])],
                "p": [s(&m.p[0]), s(&m.p[1])],
                "temperature": temperature,
                "N": m.scale.as_ref().map(s),
                "t": s(&self.t),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> Overrides {
        Overrides { precision: None, t: None, l: None }
    }

    #[test]
    fn numbers_and_strings_parse_alike() {
        let text = r#"{"schema":"hbl-config/1","a":[1,"-1"],"b":["0.7",-0.7],"p":["1/2",0.5]}"#;
        let rc = RunConfig::resolve(serde_json::from_str(text).unwrap(), &none()).unwrap();
        assert_eq!(rc.model.b[0], -rc.model.b[1].clone());
        assert_eq!(rc.model.b[0], Real::parse("0.7", rc.prec).unwrap());
        assert_eq!(rc.model.p[0], rc.model.p[1]);
    }

    #[test]
    fn fraction_is_exact_quotient() {
        let d = Decimal::from("1/3");
        let x = d.parse("t", 256).unwrap();
        assert!((x * 3i64 - 1.0).abs() < 1e-75);
        assert!(Decimal::from("1/0").parse("t", 256).is_err());
        assert!(Decimal::from("one").parse("t", 256).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"schema":"hbl-config/1","a":[1,-1],"b":[1,-1],"p":[0.5,0.5],"tempo":1}"#;
        assert!(serde_json::from_str::<ConfigFile>(text).is_err());
    }

    #[test]
    fn temperature_and_l_conflict() {
        let mut f = ConfigFile::builtin();
        f.temperature = Some("1".into());
        f.l = Some("0".into());
        assert_eq!(RunConfig::resolve(f.clone(), &none()).unwrap_err().exit, 2);
        // A command-line L replaces the file's temperature.
        let ov = Overrides { l: Some("-1".into()), ..none() };
        assert!(matches!(RunConfig::resolve(f, &ov).unwrap().model.temperature, Temperature::DoubleScaling { .. }));
    }

    #[test]
    fn precision_override_wins() {
        let mut f = ConfigFile::builtin();
        f.precision = Some(320);
        assert_eq!(RunConfig::resolve(f.clone(), &none()).unwrap().prec, 320);
        let ov = Overrides { precision: Some(512), ..none() };
        assert_eq!(RunConfig::resolve(f, &ov).unwrap().prec, 512);
    }

    #[test]
    fn time_outside_unit_interval_is_config_error() {
        for t in ["0", "1", "-0.5", "2"] {
            let ov = Overrides { t: Some(t.into()), ..none() };
            assert_eq!(RunConfig::resolve(ConfigFile::builtin(), &ov).unwrap_err().code, "config");
        }
    }
}
