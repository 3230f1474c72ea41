//! Deterministic JSON output: sorted keys, floats rounded to 12
//! significant digits, non-finite values as `null`.

use serde_json::{Map, Value};

use gtsa_core::metrics::MetricsReport;

/// `v` rounded to 12 significant digits, or `null` when not finite.
pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

pub fn metrics_json(m: Option<&MetricsReport>) -> Value {
    let mut o = Map::new();
    o.insert("ari".into(), opt_num(m.map(|m| m.ari)));
    o.insert("fm".into(), opt_num(m.map(|m| m.fm)));
    o.insert("vm".into(), opt_num(m.map(|m| m.vm)));
    o.insert(
        "n_clusters_found".into(),
        m.map_or(Value::Null, |m| m.n_clusters_found.into()),
    );
    Value::Object(o)
}

/// Rounds every float in a JSON tree in place.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => *v = num(n.as_f64().expect("f64 number")),
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with a trailing newline. `serde_json::Map` keeps keys sorted.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.1 + 0.2).to_string(), "0.3");
        assert_eq!(num(2.0 / 3.0).to_string(), "0.666666666667");
        assert_eq!(num(123456.78901234567).to_string(), "123456.789012");
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(f64::INFINITY), Value::Null);
    }

    #[test]
    fn keys_come_out_sorted() {
        let mut o = Map::new();
        o.insert("zeta".into(), 1.into());
        o.insert("alpha".into(), num(1.0 / 7.0));
        let text = to_text(&Value::Object(o));
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
        assert!(text.contains("0.142857142857"));
    }

    #[test]
    fn metrics_schema() {
        let m = MetricsReport {
            ari: 0.5,
            fm: 0.25,
            vm: 1.0,
            n_clusters_found: 3,
        };
        assert_eq!(
            serde_json::to_string(&metrics_json(Some(&m))).unwrap(),
            r#"{"ari":0.5,"fm":0.25,"n_clusters_found":3,"vm":1.0}"#
        );
        assert_eq!(
            serde_json::to_string(&metrics_json(None)).unwrap(),
            r#"{"ari":null,"fm":null,"n_clusters_found":null,"vm":null}"#
        );
    }
}
