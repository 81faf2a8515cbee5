//! Constants of the Lipschitz approximation and Reifenberg estimates.
//!
//! These are proof artifacts, far too small to be useful as thresholds, and
//! are exported only to annotate reports. Most underflow `f64`, so each is
//! carried as `log2`.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremConstant {
    pub name: &'static str,
    pub expression: &'static str,
    pub log2: f64,
    /// `2^log2` when it is representable.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsTable {
    /// Codimension.
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    pub constants: Vec<TheoremConstant>,
}

fn entry(name: &'static str, expression: &'static str, log2: f64) -> TheoremConstant {
    let value = if log2 > -1000.0 && log2 < 1000.0 {
        Some(log2.exp2())
    } else {
        None
    };
    TheoremConstant {
        name,
        expression,
        log2,
        value,
    }
}

/// Constants evaluated for codimension `k`, density gap `alpha` and smallness `delta`.
pub fn constants_table(k: usize, alpha: f64, delta: f64) -> ConstantsTable {
    let lk = (k as f64).log2();
    let la = alpha.log2();
    let ld = delta.log2();
    let constants = vec![
        entry("delta_6", "2^-1688 k^-40", -1688.0 - 40.0 * lk),
        entry("delta_5", "2^-844 k^-20", -844.0 - 20.0 * lk),
        entry("delta_1", "1 / (2^7 k)", -7.0 - lk),
        entry("delta_2", "alpha^3 / 2^26", 3.0 * la - 26.0),
        entry(
            "delta_3_squared",
            "alpha^12 / (2^174 k^5)",
            12.0 * la - 174.0 - 5.0 * lk,
        ),
        entry("band_delta", "alpha^3 / 2^23", 3.0 * la - 23.0),
        entry("beta_1", "alpha / (48 (2 - alpha))", la - (48.0 * (2.0 - alpha)).log2()),
        entry(
            "beta_2",
            "alpha / (960 (4 - alpha))",
            la - (960.0 * (4.0 - alpha)).log2(),
        ),
        entry(
            "beta_3",
            "alpha / (2^8 * 15 * (4 - alpha))",
            la - (3840.0 * (4.0 - alpha)).log2(),
        ),
        entry("beta_4", "alpha^3 / 2^21", 3.0 * la - 21.0),
        entry("lipschitz_bound", "delta^(1/40)", ld / 40.0),
        entry(
            "symmetric_difference_bound",
            "2^83 delta^(1/16) (times pi sigma^2)",
            83.0 + ld / 16.0,
        ),
        entry("reifenberg_bound", "2^44 delta^(1/80)", 44.0 + ld / 80.0),
    ];
    ConstantsTable {
        k,
        alpha,
        delta,
        constants,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_constants_stay_in_log_form() {
        let t = constants_table(1, 0.5, 1e-2);
        let get = |n: &str| t.constants.iter().find(|c| c.name == n).unwrap().clone();
        assert_eq!(get("delta_6").log2, -1688.0);
        assert!(get("delta_6").value.is_none());
        assert_eq!(get("delta_1").value, Some(1.0 / 128.0));
        assert!((get("beta_1").value.unwrap() - 0.5 / 72.0).abs() < 1e-15);
        // the Reifenberg bound is far above 1 at any practical delta
        assert!(get("reifenberg_bound").value.unwrap() > 1.0);
        assert!(serde_json::to_string(&t).unwrap().contains("delta_6"));
    }
}
