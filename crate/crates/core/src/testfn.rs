//! Test functions for linear statistics `S = Σ f(s_k²)`.
//!
//! Every function is evaluated on the squared-singular-value axis (`f`) and
//! on the symmetrized axis (`g(λ) = f(λ²)`, `g'(λ) = 2λ f'(λ²)`).
//!
//! Textual form, used by the CLI and config files:
//! `identity`, `square`, `constant(c)`, `monomial(k)`,
//! `gaussian_bump(center, width)`, `cosine(freq)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// `x^k`
    Monomial(u32),
    /// `exp(-(x - center)² / width²)`
    GaussianBump { center: f64, width: f64 },
    /// `cos(freq · x)`
    Cosine { freq: f64 },
    /// `offset + Σ coeff · f_i`
    Combination {
        offset: f64,
        terms: Vec<(f64, TestFunction)>,
    },
}

impl TestFunction {
    pub fn identity() -> Self {
        TestFunction::Monomial(1)
    }

    /// Functions with closed-form or smooth, well-conditioned variance
    /// integrals, used for sweeps and invariance checks.
    pub fn registry() -> Vec<TestFunction> {
        vec![
            TestFunction::identity(),
            TestFunction::Monomial(2),
            TestFunction::Monomial(3),
            TestFunction::GaussianBump {
                center: 1.25,
                width: 0.25,
            },
            TestFunction::Cosine { freq: 1.5 },
        ]
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// `f(x)`
    pub fn f(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::Monomial(k) => x.powi(*k as i32),
            TestFunction::GaussianBump { center, width } => {
                let u = (x - center) / width;
                (-u * u).exp()
            }
            TestFunction::Cosine { freq } => (freq * x).cos(),
            TestFunction::Combination { offset, terms } => {
                offset + terms.iter().map(|(c, t)| c * t.f(x)).sum::<f64>()
            }
        }
    }

    /// `f'(x)`
    pub fn f_prime(&self, x: f64) -> f64 {
        match self {
            TestFunction::Constant(_) => 0.0,
            TestFunction::Monomial(0) => 0.0,
            TestFunction::Monomial(k) => f64::from(*k) * x.powi(*k as i32 - 1),
            TestFunction::GaussianBump { center, width } => {
                let u = (x - center) / width;
                -2.0 * u / width * (-u * u).exp()
            }
            TestFunction::Cosine { freq } => -freq * (freq * x).sin(),
            TestFunction::Combination { terms, .. } => {
                terms.iter().map(|(c, t)| c * t.f_prime(x)).sum()
            }
        }
    }

    /// `g(λ) = f(λ²)`
    pub fn g(&self, lambda: f64) -> f64 {
        self.f(lambda * lambda)
    }

    /// `g'(λ) = 2λ f'(λ²)`
    pub fn g_prime(&self, lambda: f64) -> f64 {
        2.0 * lambda * self.f_prime(lambda * lambda)
    }

    /// `α·self + β·other`
    pub fn combine(alpha: f64, f: &TestFunction, beta: f64, h: &TestFunction) -> TestFunction {
        TestFunction::Combination {
            offset: 0.0,
            terms: vec![(alpha, f.clone()), (beta, h.clone())],
        }
    }

    pub fn shifted(&self, c: f64) -> TestFunction {
        TestFunction::Combination {
            offset: c,
            terms: vec![(1.0, self.clone())],
        }
    }

    pub fn scaled(&self, c: f64) -> TestFunction {
        TestFunction::Combination {
            offset: 0.0,
            terms: vec![(c, self.clone())],
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Constant(c) => write!(f, "constant({c})"),
            TestFunction::Monomial(1) => write!(f, "identity"),
            TestFunction::Monomial(2) => write!(f, "square"),
            TestFunction::Monomial(k) => write!(f, "monomial({k})"),
            TestFunction::GaussianBump { center, width } => {
                write!(f, "gaussian_bump({center},{width})")
            }
            TestFunction::Cosine { freq } => write!(f, "cosine({freq})"),
            TestFunction::Combination { offset, terms } => {
                write!(f, "{offset}")?;
                for (c, t) in terms {
                    write!(f, "+{c}*{t}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |msg: &str| Error::InvalidSpec(format!("test function `{s}`: {msg}"));
        let (name, args) = match s.find('(') {
            Some(open) => {
                let inner = s[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| bad("missing closing parenthesis"))?;
                let args = inner
                    .split(',')
                    .map(|a| a.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| bad(&format!("bad argument: {e}")))?;
                (s[..open].trim(), args)
            }
            None => (s, Vec::new()),
        };
        let want = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("expected {n} argument(s), got {}", args.len())))
            }
        };
        match name {
            "identity" => want(0).map(|_| TestFunction::Monomial(1)),
            "square" => want(0).map(|_| TestFunction::Monomial(2)),
            "constant" => want(1).map(|_| TestFunction::Constant(args[0])),
            "monomial" => {
                want(1)?;
                let k = args[0];
                if k < 0.0 || k.fract() != 0.0 || k > 64.0 {
                    return Err(bad("degree must be an integer in 0..=64"));
                }
                Ok(TestFunction::Monomial(k as u32))
            }
            "gaussian_bump" => {
                want(2)?;
                if args[1] <= 0.0 {
                    return Err(bad("width must be positive"));
                }
                Ok(TestFunction::GaussianBump {
                    center: args[0],
                    width: args[1],
                })
            }
            "cosine" => want(1).map(|_| TestFunction::Cosine { freq: args[0] }),
            other => Err(bad(&format!("unknown function `{other}`"))),
        }
    }
}

impl Serialize for TestFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TestFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
