/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub(crate) fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn join_sig17(values: impl IntoIterator<Item = f64>, sep: &str) -> String {
    values.into_iter().map(sig17).collect::<Vec<_>>().join(sep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_round_trips() {
        for v in [0.0, 1.0, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.1 + 0.2] {
            let s = sig17(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }
}
