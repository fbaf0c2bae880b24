//! Log-space arithmetic and float serialization helpers.

/// Streaming log-sum-exp with a running maximum and Neumaier-compensated
/// sum of rescaled terms. Merging two accumulators is exact up to rounding.
#[derive(Clone, Copy, Debug)]
pub struct LogSum {
    max: f64,
    sum: f64,
    comp: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0, comp: 0.0 }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    fn add_scaled(&mut self, t: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
    }

    fn rescale(&mut self, new_max: f64) {
        let f = (self.max - new_max).exp();
        self.sum *= f;
        self.comp *= f;
        self.max = new_max;
    }

    /// Adds `exp(v)`.
    pub fn push(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            if self.max == f64::NEG_INFINITY {
                self.max = v;
            } else {
                self.rescale(v);
            }
        }
        self.add_scaled((v - self.max).exp());
    }

    pub fn merge(mut self, mut other: LogSum) -> LogSum {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return other;
        }
        if other.max > self.max {
            std::mem::swap(&mut self, &mut other);
        }
        other.rescale(self.max);
        self.add_scaled(other.sum);
        self.add_scaled(other.comp);
        self
    }

    /// `log Σ exp(v)`; `-∞` for an empty sum.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + (self.sum + self.comp).ln()
        }
    }
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = LogSum::new();
    for v in values {
        acc.push(v);
    }
    acc.value()
}

/// Natural log of a 128-bit count (`-∞` for zero).
pub fn ln_u128(v: u128) -> f64 {
    if v == 0 {
        return f64::NEG_INFINITY;
    }
    let bits = 128 - v.leading_zeros();
    if bits <= 64 {
        (v as f64).ln()
    } else {
        // Keep the top 64 bits and add the shift.
        let shift = bits - 64;
        ((v >> shift) as f64).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `ln n!` by summing logs; exact enough for the small `n` used here.
pub fn ln_factorial(n: u64) -> f64 {
    let mut acc = 0.0;
    let mut comp = 0.0;
    for i in 2..=n {
        let y = (i as f64).ln() - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    acc
}

/// `#[serde(with = "crate::numeric::ext")]`: floats with `"inf"`, `"-inf"`
/// and `"nan"` as strings, finite values as numbers.
pub mod ext {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(D::Error::custom(format!("bad float {s:?}"))),
            },
        }
    }
}

/// `Option<(f64, f64)>` counterpart of [`ext`].
pub mod ext_pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct P(#[serde(with = "super::ext")] f64, #[serde(with = "super::ext")] f64);

    pub fn serialize<S: Serializer>(v: &Option<(f64, f64)>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|(a, b)| P(a, b)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<(f64, f64)>, D::Error> {
        Ok(Option::<P>::deserialize(d)?.map(|P(a, b)| (a, b)))
    }
}

/// `Option<f64>` counterpart of [`ext`].
pub mod ext_opt {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct F(#[serde(with = "super::ext")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(F).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<F>::deserialize(d)?.map(|F(v)| v))
    }
}

/// Formats a float for CSV with the same conventions as [`ext`].
pub fn fmt_ext(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Solves `m x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` for a (numerically) singular matrix.
pub fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}
