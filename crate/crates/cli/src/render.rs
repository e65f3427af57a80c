use herbrand_core::arith::{self, Rational};
use num_bigint::{BigInt, BigUint};
use serde_json::Value;

/// Rational display for table and csv output.
#[derive(Debug, Clone, Copy)]
pub struct Numbers {
    pub decimal: Option<usize>,
}

impl Numbers {
    pub fn q(&self, q: &Rational) -> String {
        match self.decimal {
            Some(digits) => arith::format_decimal(q, digits),
            None => arith::format_rational(q),
        }
    }

    pub fn int(&self, n: &BigUint) -> String {
        self.q(&arith::from_biguint(n))
    }

    pub fn opt(&self, q: Option<&Rational>) -> String {
        q.map_or_else(String::new, |q| self.q(q))
    }
}

pub fn jq(q: &Rational) -> Value {
    herbrand_core::extspec::rational_json(q)
}

pub fn jn(n: &BigUint) -> Value {
    jq(&arith::from_biguint(n))
}

pub fn ji(n: i64) -> Value {
    jq(&Rational::from_integer(BigInt::from(n)))
}

/// `key  value` lines with the keys padded to a common width.
pub fn table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

pub fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}
