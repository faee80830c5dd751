//! Concrete runtime values: the five supported Dafny types, comparison
//! modes, and rendering to Dafny literal syntax.
//!
//! Integers are arbitrary precision throughout; there is no floating point
//! anywhere in the value model.

use num_bigint::BigInt;
use std::fmt;
use thiserror::Error;

/// The closed set of supported Dafny types. Anything else (`array2<int>`,
/// `set<int>`, `nat`, ...) is rejected at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueType {
    Bool,
    Int,
    Str,
    ArrayInt,
    SeqInt,
}

impl ValueType {
    pub fn is_collection(self) -> bool {
        matches!(self, ValueType::ArrayInt | ValueType::SeqInt)
    }

    /// Dafny spelling of the type.
    pub fn dafny_name(self) -> &'static str {
        match self {
            ValueType::Bool => "bool",
            ValueType::Int => "int",
            ValueType::Str => "string",
            ValueType::ArrayInt => "array<int>",
            ValueType::SeqInt => "seq<int>",
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dafny_name())
    }
}

/// A typed runtime value used for test inputs, expected outputs, and mutants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConcreteValue {
    Bool(bool),
    Int(BigInt),
    Str(String),
    ArrayInt(Vec<BigInt>),
    SeqInt(Vec<BigInt>),
}

impl ConcreteValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            ConcreteValue::Bool(_) => ValueType::Bool,
            ConcreteValue::Int(_) => ValueType::Int,
            ConcreteValue::Str(_) => ValueType::Str,
            ConcreteValue::ArrayInt(_) => ValueType::ArrayInt,
            ConcreteValue::SeqInt(_) => ValueType::SeqInt,
        }
    }

    pub fn int(v: i64) -> Self {
        ConcreteValue::Int(BigInt::from(v))
    }

    pub fn array_of(vs: &[i64]) -> Self {
        ConcreteValue::ArrayInt(vs.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn seq_of(vs: &[i64]) -> Self {
        ConcreteValue::SeqInt(vs.iter().map(|&v| BigInt::from(v)).collect())
    }

    /// Elements of an array/seq value; `None` for scalars.
    pub fn as_collection(&self) -> Option<&[BigInt]> {
        match self {
            ConcreteValue::ArrayInt(xs) | ConcreteValue::SeqInt(xs) => Some(xs),
            _ => None,
        }
    }

    /// Reinterpret between `array<int>` and `seq<int>` without copying
    /// semantics: both are finite integer lists. Scalars pass through only
    /// when the type already matches.
    pub fn coerce_to(&self, ty: ValueType) -> Option<ConcreteValue> {
        if self.value_type() == ty {
            return Some(self.clone());
        }
        match (self, ty) {
            (ConcreteValue::ArrayInt(xs), ValueType::SeqInt) => {
                Some(ConcreteValue::SeqInt(xs.clone()))
            }
            (ConcreteValue::SeqInt(xs), ValueType::ArrayInt) => {
                Some(ConcreteValue::ArrayInt(xs.clone()))
            }
            _ => None,
        }
    }
}

impl fmt::Display for ConcreteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_dafny_literal(self, false))
    }
}

/// How two values are compared: element-wise ordered equality, or equality
/// of element multisets (order-insensitive, collections only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Comparator {
    #[default]
    Exact,
    Multiset,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparator::Exact => f.write_str("exact"),
            Comparator::Multiset => f.write_str("multiset"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("type mismatch: {left} vs {right}")]
    TypeMismatch { left: ValueType, right: ValueType },
    #[error("multiset comparison is only defined for array<int>/seq<int>, got {0}")]
    MultisetOnScalar(ValueType),
}

/// Compares two values of the same type under the given comparator.
pub fn values_equal(
    a: &ConcreteValue,
    b: &ConcreteValue,
    cmp: Comparator,
) -> Result<bool, ValueError> {
    if a.value_type() != b.value_type() {
        return Err(ValueError::TypeMismatch {
            left: a.value_type(),
            right: b.value_type(),
        });
    }
    match cmp {
        Comparator::Exact => Ok(a == b),
        Comparator::Multiset => {
            let (xs, ys) = match (a.as_collection(), b.as_collection()) {
                (Some(xs), Some(ys)) => (xs, ys),
                _ => return Err(ValueError::MultisetOnScalar(a.value_type())),
            };
            if xs.len() != ys.len() {
                return Ok(false);
            }
            let mut xs = xs.to_vec();
            let mut ys = ys.to_vec();
            xs.sort();
            ys.sort();
            Ok(xs == ys)
        }
    }
}

/// Compares output tuples component-wise. The comparator applies to
/// collection-valued components; scalar components always compare exactly.
pub fn tuples_equal(a: &[ConcreteValue], b: &[ConcreteValue], cmp: Comparator) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).all(|(x, y)| {
        let c = if x.value_type().is_collection() {
            cmp
        } else {
            Comparator::Exact
        };
        values_equal(x, y, c).unwrap_or(false)
    })
}

/// Renders a value as a Dafny expression/initializer.
///
/// `as_fresh_array` selects the allocating form for `array<int>` values
/// (`new int[] [3, 4, 5, 6]`, the empty case as `new int[0]`); otherwise
/// collections render in sequence-display form `[3, 4]`.
pub fn render_dafny_literal(v: &ConcreteValue, as_fresh_array: bool) -> String {
    match v {
        ConcreteValue::Bool(b) => if *b { "true" } else { "false" }.to_string(),
        ConcreteValue::Int(n) => n.to_string(),
        ConcreteValue::Str(s) => render_dafny_string(s),
        ConcreteValue::ArrayInt(xs) => {
            if as_fresh_array {
                if xs.is_empty() {
                    "new int[0]".to_string()
                } else {
                    format!("new int[] [{}]", join_ints(xs))
                }
            } else {
                format!("[{}]", join_ints(xs))
            }
        }
        ConcreteValue::SeqInt(xs) => format!("[{}]", join_ints(xs)),
    }
}

fn join_ints(xs: &[BigInt]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn render_dafny_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\0' => out.push_str("\\0"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_ignores_order() {
        let a = ConcreteValue::seq_of(&[4, 5]);
        let b = ConcreteValue::seq_of(&[5, 4]);
        assert_eq!(values_equal(&a, &b, Comparator::Multiset), Ok(true));
        assert_eq!(values_equal(&a, &b, Comparator::Exact), Ok(false));
        assert_eq!(values_equal(&a, &a, Comparator::Exact), Ok(true));
    }

    #[test]
    fn multiset_counts_multiplicity() {
        let a = ConcreteValue::seq_of(&[4, 4, 5]);
        let b = ConcreteValue::seq_of(&[4, 5, 5]);
        assert_eq!(values_equal(&a, &b, Comparator::Multiset), Ok(false));
        let c = ConcreteValue::seq_of(&[5, 4, 4]);
        assert_eq!(values_equal(&a, &c, Comparator::Multiset), Ok(true));
    }

    #[test]
    fn type_mismatch_is_an_error() {
        let a = ConcreteValue::array_of(&[1]);
        let b = ConcreteValue::seq_of(&[1]);
        assert!(matches!(
            values_equal(&a, &b, Comparator::Exact),
            Err(ValueError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn multiset_on_scalar_is_an_error() {
        let a = ConcreteValue::int(3);
        assert_eq!(
            values_equal(&a, &a, Comparator::Multiset),
            Err(ValueError::MultisetOnScalar(ValueType::Int))
        );
    }

    #[test]
    fn renders_fresh_array() {
        let v = ConcreteValue::array_of(&[3, 4, 5, 6]);
        assert_eq!(render_dafny_literal(&v, true), "new int[] [3, 4, 5, 6]");
        assert_eq!(render_dafny_literal(&v, false), "[3, 4, 5, 6]");
    }

    #[test]
    fn renders_seq_and_scalars() {
        assert_eq!(
            render_dafny_literal(&ConcreteValue::seq_of(&[4, 5]), false),
            "[4, 5]"
        );
        assert_eq!(
            render_dafny_literal(&ConcreteValue::seq_of(&[]), false),
            "[]"
        );
        assert_eq!(
            render_dafny_literal(&ConcreteValue::ArrayInt(vec![]), true),
            "new int[0]"
        );
        assert_eq!(render_dafny_literal(&ConcreteValue::int(-7), false), "-7");
        assert_eq!(
            render_dafny_literal(&ConcreteValue::Bool(false), false),
            "false"
        );
        assert_eq!(
            render_dafny_literal(&ConcreteValue::Str("a\"b\\c".to_string()), false),
            "\"a\\\"b\\\\c\""
        );
    }

    #[test]
    fn tuple_comparison_mixes_scalar_and_collection() {
        let a = [ConcreteValue::int(1), ConcreteValue::seq_of(&[1, 2])];
        let b = [ConcreteValue::int(1), ConcreteValue::seq_of(&[2, 1])];
        assert!(tuples_equal(&a, &b, Comparator::Multiset));
        assert!(!tuples_equal(&a, &b, Comparator::Exact));
    }
}
