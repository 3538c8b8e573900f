//! Strict JSON reading and writing.
//!
//! Exact scalars are strings such as `"-3/4"`; non-canonical spellings are
//! accepted and normalized, and each normalization is reported as a notice.
//! Unknown fields are errors.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;
use crate::numerics::rational::take_notices;

#[derive(Clone, Debug, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub notices: Vec<String>,
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<Parsed<T>> {
    take_notices();
    let parsed = serde_json::from_str(text);
    let notices = take_notices();
    Ok(Parsed { value: parsed?, notices })
}

/// Typed view of an already parsed JSON value.
pub fn parse_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<Parsed<T>> {
    take_notices();
    let parsed = serde_json::from_value(value);
    let notices = take_notices();
    Ok(Parsed { value: parsed?, notices })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Parsed<T>> {
    parse_json(&fs::read_to_string(path)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::LatticeError;
    use crate::harness::{gen_instance, BddInstance, RadiusPolicy};
    use crate::numerics::{rat, RatVector};
    use crate::qary::QaryLatticeSpec;

    #[test]
    fn instance_round_trip() {
        let spec = QaryLatticeSpec::new(2, 5, 1, vec![vec![1], vec![2]]);
        let inst = gen_instance(&spec, &RadiusPolicy::TheoremRadiusFraction(rat(1, 2)), 3).unwrap();
        let text = to_json(&inst).unwrap();
        let back: Parsed<BddInstance> = parse_json(&text).unwrap();
        assert_eq!(back.value, inst);
        assert!(back.notices.is_empty());
        assert_eq!(to_json(&back.value).unwrap(), text);
    }

    #[test]
    fn normalization_notice() {
        let p: Parsed<RatVector> = parse_json(r#"["3/6", "2"]"#).unwrap();
        assert_eq!(p.value, RatVector::new(vec![rat(1, 2), rat(2, 1)]));
        assert_eq!(p.notices.len(), 1);
        assert!(p.notices[0].contains("1/2"));
    }

    #[test]
    fn strict_fields_and_locations() {
        let e = parse_json::<QaryLatticeSpec>(r#"{"n":2,"q":5,"k":1,"A":[[1],[2]],"extra":0}"#).unwrap_err();
        assert!(matches!(&e, LatticeError::Parse(m) if m.contains("unknown field")));
        let e = parse_json::<QaryLatticeSpec>("{\"n\":2,\n\"q\":}").unwrap_err();
        assert!(matches!(&e, LatticeError::Parse(m) if m.contains("line 2")));
        assert_eq!(e.exit_code(), 4);
    }
}
