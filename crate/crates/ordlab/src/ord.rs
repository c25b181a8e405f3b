//! Ordinals below ε₀ in Cantor normal form.
//!
//! An ordinal is a finite descending sum `w^e1*c1 + ... + w^ek*ck` with
//! hereditary exponents (each `ei` is itself such a sum) and positive natural
//! coefficients. The representation is unique, so equality is structural and
//! the ordinal order coincides with lexicographic comparison of term lists.
//!
//! The text form follows a fixed grammar:
//!
//! ```text
//! expr := term ("+" term)*
//! term := "w" ("^" "(" expr ")" | "^" atom)? ("*" nat)? | nat
//! atom := "w" | nat
//! nat  := [0-9]+
//! ```
//!
//! `w^2*3+w+4` is `ω²·3+ω+4`; exponents must strictly decrease and
//! coefficients must be positive, so every parse is already canonical.
//!
//! Besides arithmetic (`add`, `mul_omega_left`) the module fixes one
//! canonical fundamental-sequence assignment and exposes the two scan
//! primitives everything downstream is built on: `c_count(β,α) = |C_β ∩ α|`
//! and `c_step(β,α) = min(C_β ∖ α)`, where `C_{α+1} = {α}` and `C_λ` is the
//! fundamental sequence of the limit λ:
//!
//! * `(γ + w^{β+1})[n] = γ + w^β·n` (so `w[0] = 0`), and
//! * `(γ + w^λ)[n] = γ + w^{λ[n]}` for limit λ.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Hard bounds that keep every computation at desk scale.
///
/// The defaults fail loudly rather than wrap or spin: naturals are capped at
/// 2³², C-sequence scans at 10⁶ steps, walk recursion at 10⁵ frames and the
/// walk memo at 10⁷ entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Upper bound (exclusive) for parsed naturals and generated coefficients.
    pub nat_guard: u64,
    /// Maximum number of fundamental-sequence elements examined per scan.
    pub scan_limit: u64,
    /// Maximum recursion depth for walk evaluation.
    pub depth_limit: u32,
    /// Maximum number of memoized walk entries.
    pub memo_capacity: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            nat_guard: 1 << 32,
            scan_limit: 1_000_000,
            depth_limit: 100_000,
            memo_capacity: 10_000_000,
        }
    }
}

/// Errors for parsing, arithmetic and C-sequence scans.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrdError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("exponents must strictly decrease (term {index})")]
    NonDescendingExponents { index: usize },
    #[error("zero coefficient at term {index}")]
    ZeroCoefficient { index: usize },
    #[error("natural {value} exceeds the guard {guard}")]
    NatGuard { value: u64, guard: u64 },
    #[error("{0} is not a limit ordinal")]
    NotALimit(String),
    #[error("{0} has no predecessor")]
    NotASuccessor(String),
    #[error("C-sequence of 0 is undefined")]
    ZeroHasNoCSeq,
    #[error("order violation: {alpha} > {beta}")]
    OrderViolation { alpha: String, beta: String },
    #[error("|C_{beta} ∩ {beta}| is infinite for the limit {beta}")]
    InfiniteCount { beta: String },
    #[error("C_{beta} has no element ≥ {beta}; c_step needs α < β")]
    NoStep { beta: String },
    #[error("C-sequence scan exceeded {limit} steps (owner {beta}, threshold {alpha})")]
    ScanLimit { beta: String, alpha: String, limit: u64 },
}

/// One CNF term `w^exp * coeff` with `coeff ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pub exp: Ordinal,
    pub coeff: u64,
}

/// An ordinal below ε₀, kept in Cantor normal form.
///
/// The derived `Ord` is the ordinal order: for canonical CNF the
/// lexicographic comparison of `(exponent, coefficient)` term lists decides
/// exactly like the ordinals do (first differing term wins, a proper prefix
/// is smaller). The property suite pins this against an independent oracle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ordinal {
    terms: Vec<Term>,
}

/// Zero / successor / limit split of an ordinal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Zero,
    /// Carries the predecessor.
    Successor(Ordinal),
    Limit,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::from_nat(1)
    }

    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::one())
    }

    pub fn from_nat(n: u64) -> Self {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![Term { exp: Ordinal::zero(), coeff: n }],
            }
        }
    }

    /// `w^exp` (coefficient 1).
    pub fn omega_pow(exp: Ordinal) -> Self {
        Ordinal {
            terms: vec![Term { exp, coeff: 1 }],
        }
    }

    /// Builds from raw terms, validating strict exponent descent and positive
    /// coefficients.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Result<Self, OrdError> {
        for (i, (_, c)) in terms.iter().enumerate() {
            if *c == 0 {
                return Err(OrdError::ZeroCoefficient { index: i });
            }
        }
        for i in 1..terms.len() {
            if terms[i - 1].0 <= terms[i].0 {
                return Err(OrdError::NonDescendingExponents { index: i });
            }
        }
        Ok(Ordinal {
            terms: terms.into_iter().map(|(exp, coeff)| Term { exp, coeff }).collect(),
        })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(n)` when the ordinal is the natural `n`.
    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.len() {
            0 => Some(0),
            1 if self.terms[0].exp.is_zero() => Some(self.terms[0].coeff),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_nat().is_some()
    }

    pub fn kind(&self) -> Kind {
        match self.terms.last() {
            None => Kind::Zero,
            Some(t) if t.exp.is_zero() => {
                let mut terms = self.terms.clone();
                let last = terms.last_mut().expect("nonempty");
                if last.coeff == 1 {
                    terms.pop();
                } else {
                    last.coeff -= 1;
                }
                Kind::Successor(Ordinal { terms })
            }
            Some(_) => Kind::Limit,
        }
    }

    pub fn is_limit(&self) -> bool {
        matches!(self.kind(), Kind::Limit)
    }

    /// `self + 1`.
    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// CNF addition. The left summand's tail below the right's leading
    /// exponent is absorbed: `3 + w = w`, while `w + 3 = w+3`.
    pub fn add(&self, other: &Ordinal) -> Ordinal {
        let Some(lead) = other.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut merged = false;
        for t in &self.terms {
            match t.exp.cmp(&lead.exp) {
                Ordering::Greater => terms.push(t.clone()),
                Ordering::Equal => {
                    terms.push(Term {
                        exp: t.exp.clone(),
                        coeff: t
                            .coeff
                            .checked_add(lead.coeff)
                            .expect("coefficient overflow in add"),
                    });
                    merged = true;
                    break;
                }
                Ordering::Less => break,
            }
        }
        let rest = if merged { &other.terms[1..] } else { &other.terms[..] };
        terms.extend(rest.iter().cloned());
        Ordinal { terms }
    }

    /// Left multiplication by ω: `w · self`. Distributes over the CNF sum,
    /// sending `w^e*c` to `w^(1+e)*c`; `w·0 = 0`.
    pub fn mul_omega_left(&self) -> Ordinal {
        let one = Ordinal::one();
        Ordinal {
            terms: self
                .terms
                .iter()
                .map(|t| Term { exp: one.add(&t.exp), coeff: t.coeff })
                .collect(),
        }
    }

    /// n-th element of the canonical fundamental sequence of a limit.
    ///
    /// * `(γ + w^{β+1})[n] = γ + w^β·n` (so `w[0] = 0`);
    /// * `(γ + w^λ)[n] = γ + w^{λ[n]}` for limit λ.
    ///
    /// Strictly increasing in `n` with supremum `self`.
    pub fn fund_seq(&self, n: u64) -> Result<Ordinal, OrdError> {
        self.fund_seq_with(n, &Limits::default())
    }

    pub fn fund_seq_with(&self, n: u64, limits: &Limits) -> Result<Ordinal, OrdError> {
        if n >= limits.nat_guard {
            return Err(OrdError::NatGuard { value: n, guard: limits.nat_guard });
        }
        let Some(last) = self.terms.last() else {
            return Err(OrdError::NotALimit(self.to_string()));
        };
        if last.exp.is_zero() {
            return Err(OrdError::NotALimit(self.to_string()));
        }
        // γ = self with one copy of w^{last.exp} peeled off.
        let mut gamma: Vec<Term> = self.terms[..self.terms.len() - 1].to_vec();
        if last.coeff > 1 {
            gamma.push(Term { exp: last.exp.clone(), coeff: last.coeff - 1 });
        }
        match last.exp.kind() {
            Kind::Zero => unreachable!("checked above"),
            Kind::Successor(e) => {
                if n > 0 {
                    gamma.push(Term { exp: e, coeff: n });
                }
                Ok(Ordinal { terms: gamma })
            }
            Kind::Limit => {
                let en = last.exp.fund_seq_with(n, limits)?;
                gamma.push(Term { exp: en, coeff: 1 });
                Ok(Ordinal { terms: gamma })
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self, OrdError> {
        Ordinal::parse_with(s, &Limits::default())
    }

    pub fn parse_with(s: &str, limits: &Limits) -> Result<Self, OrdError> {
        Parser { input: s.as_bytes(), pos: 0, guard: limits.nat_guard }.run()
    }
}

impl FromStr for Ordinal {
    type Err = OrdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ordinal::parse(s)
    }
}

impl TryFrom<String> for Ordinal {
    type Error = OrdError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Ordinal::parse(&s)
    }
}

impl From<Ordinal> for String {
    fn from(o: Ordinal) -> String {
        o.to_string()
    }
}

impl fmt::Display for Ordinal {
    /// Canonical text form with minimal parentheses: exponents that are
    /// atoms per the grammar (`w` or a natural) stay bare, anything else is
    /// parenthesized. `w^1` prints as `w`, coefficient 1 is dropped.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            if t.exp.is_zero() {
                write!(f, "{}", t.coeff)?;
                continue;
            }
            if t.exp.as_nat() == Some(1) {
                f.write_str("w")?;
            } else if let Some(n) = t.exp.as_nat() {
                write!(f, "w^{n}")?;
            } else if t.exp == Ordinal::omega() {
                f.write_str("w^w")?;
            } else {
                write!(f, "w^({})", t.exp)?;
            }
            if t.coeff > 1 {
                write!(f, "*{}", t.coeff)?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    guard: u64,
}

impl<'a> Parser<'a> {
    fn run(mut self) -> Result<Ordinal, OrdError> {
        let o = self.expr()?;
        self.skip_ws();
        if self.pos != self.input.len() {
            return Err(self.err("trailing input"));
        }
        Ok(o)
    }

    fn err(&self, msg: &str) -> OrdError {
        OrdError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), OrdError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn nat(&mut self) -> Result<u64, OrdError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a natural"));
        }
        let digits = std::str::from_utf8(&self.input[start..self.pos]).expect("ascii digits");
        let value: u64 = digits.parse().map_err(|_| OrdError::NatGuard {
            value: u64::MAX,
            guard: self.guard,
        })?;
        if value >= self.guard {
            return Err(OrdError::NatGuard { value, guard: self.guard });
        }
        Ok(value)
    }

    fn expr(&mut self) -> Result<Ordinal, OrdError> {
        let mut terms: Vec<(Ordinal, u64)> = Vec::new();
        let mut saw_zero = false;
        loop {
            let (exp, coeff) = self.term()?;
            if coeff == 0 {
                // Only a bare "0" is the zero ordinal; a zero term inside a
                // sum is non-canonical.
                saw_zero = true;
            } else {
                terms.push((exp, coeff));
            }
            if !self.eat(b'+') {
                break;
            }
        }
        if saw_zero && !terms.is_empty() {
            return Err(self.err("zero term in a sum"));
        }
        Ordinal::from_terms(terms)
    }

    /// Returns `(exponent, coefficient)`; a bare natural `n` is `(0, n)`.
    fn term(&mut self) -> Result<(Ordinal, u64), OrdError> {
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exp = if self.eat(b'^') {
                    if self.eat(b'(') {
                        let e = self.expr()?;
                        self.expect(b')')?;
                        e
                    } else {
                        // atom := "w" | nat
                        match self.peek() {
                            Some(b'w') => {
                                self.pos += 1;
                                Ordinal::omega()
                            }
                            Some(d) if d.is_ascii_digit() => Ordinal::from_nat(self.nat()?),
                            _ => return Err(self.err("expected atom after '^'")),
                        }
                    }
                } else {
                    Ordinal::one()
                };
                let coeff = if self.eat(b'*') {
                    let c = self.nat()?;
                    if c == 0 {
                        return Err(self.err("zero coefficient"));
                    }
                    c
                } else {
                    1
                };
                Ok((exp, coeff))
            }
            Some(d) if d.is_ascii_digit() => {
                let n = self.nat()?;
                Ok((Ordinal::zero(), n))
            }
            _ => Err(self.err("expected 'w' or a natural")),
        }
    }
}

/// The canonical C-sequence of an ordinal β > 0: `C_{α+1} = {α}` and
/// `C_λ` = the fundamental sequence of the limit λ.
#[derive(Debug, Clone)]
pub struct CSeq {
    owner: Ordinal,
    kind: CSeqKind,
}

#[derive(Debug, Clone)]
enum CSeqKind {
    Successor(Ordinal),
    Limit,
}

impl CSeq {
    pub fn new(beta: &Ordinal) -> Result<Self, OrdError> {
        match beta.kind() {
            Kind::Zero => Err(OrdError::ZeroHasNoCSeq),
            Kind::Successor(p) => Ok(CSeq { owner: beta.clone(), kind: CSeqKind::Successor(p) }),
            Kind::Limit => Ok(CSeq { owner: beta.clone(), kind: CSeqKind::Limit }),
        }
    }

    pub fn owner(&self) -> &Ordinal {
        &self.owner
    }

    /// n-th element; `None` past the end (only successors end).
    pub fn get(&self, n: u64) -> Result<Option<Ordinal>, OrdError> {
        self.get_with(n, &Limits::default())
    }

    pub fn get_with(&self, n: u64, limits: &Limits) -> Result<Option<Ordinal>, OrdError> {
        match &self.kind {
            CSeqKind::Successor(p) => Ok((n == 0).then(|| p.clone())),
            CSeqKind::Limit => self.owner.fund_seq_with(n, limits).map(Some),
        }
    }
}

/// `|C_β ∩ α|` — how many C-sequence elements of β lie below α.
///
/// Requires α ≤ β; for a limit β the diagonal `c_count(β, β)` would be
/// infinite and errors. Scans are bounded by `limits.scan_limit`.
pub fn c_count(beta: &Ordinal, alpha: &Ordinal, limits: &Limits) -> Result<u64, OrdError> {
    if alpha > beta {
        return Err(OrdError::OrderViolation {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    match CSeq::new(beta)?.kind {
        CSeqKind::Successor(p) => Ok(u64::from(&p < alpha)),
        CSeqKind::Limit => {
            if alpha == beta {
                return Err(OrdError::InfiniteCount { beta: beta.to_string() });
            }
            scan(beta, alpha, limits).map(|(count, _)| count)
        }
    }
}

/// `min(C_β ∖ α)` — the first C-sequence element of β that is ≥ α.
///
/// Requires α < β (every element of C_β is below β, so the diagonal has no
/// step). Equals α exactly when α ∈ C_β.
pub fn c_step(beta: &Ordinal, alpha: &Ordinal, limits: &Limits) -> Result<Ordinal, OrdError> {
    if alpha > beta {
        return Err(OrdError::OrderViolation {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    if alpha == beta {
        return Err(OrdError::NoStep { beta: beta.to_string() });
    }
    match CSeq::new(beta)?.kind {
        // α < σ+1 means α ≤ σ, so σ itself is the step.
        CSeqKind::Successor(p) => Ok(p),
        CSeqKind::Limit => scan(beta, alpha, limits).map(|(_, step)| step),
    }
}

/// One pass over C_β returning `(|C_β ∩ α|, min(C_β ∖ α))` for limit β, α < β.
pub fn c_scan(beta: &Ordinal, alpha: &Ordinal, limits: &Limits) -> Result<(u64, Ordinal), OrdError> {
    scan(beta, alpha, limits)
}

fn scan(beta: &Ordinal, alpha: &Ordinal, limits: &Limits) -> Result<(u64, Ordinal), OrdError> {
    let mut n = 0u64;
    loop {
        if n >= limits.scan_limit {
            return Err(OrdError::ScanLimit {
                beta: beta.to_string(),
                alpha: alpha.to_string(),
                limit: limits.scan_limit,
            });
        }
        let e = beta.fund_seq_with(n, limits)?;
        if &e >= alpha {
            return Ok((n, e));
        }
        n += 1;
    }
}

/// Elements of `C_β ∩ α` (ascending) together with `min(C_β ∖ α)`.
/// Handles both successor and limit β; requires α < β.
pub fn c_below_and_step(
    beta: &Ordinal,
    alpha: &Ordinal,
    limits: &Limits,
) -> Result<(Vec<Ordinal>, Ordinal), OrdError> {
    if alpha > beta {
        return Err(OrdError::OrderViolation {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    if alpha == beta {
        return Err(OrdError::NoStep { beta: beta.to_string() });
    }
    match CSeq::new(beta)?.kind {
        CSeqKind::Successor(p) => Ok((Vec::new(), p)),
        CSeqKind::Limit => {
            let mut below = Vec::new();
            let mut n = 0u64;
            loop {
                if n >= limits.scan_limit {
                    return Err(OrdError::ScanLimit {
                        beta: beta.to_string(),
                        alpha: alpha.to_string(),
                        limit: limits.scan_limit,
                    });
                }
                let e = beta.fund_seq_with(n, limits)?;
                if &e >= alpha {
                    return Ok((below, e));
                }
                below.push(e);
                n += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).expect(s)
    }

    #[test]
    fn parse_canonical_example() {
        let x = o("w^2*3+w+4");
        let terms: Vec<(String, u64)> =
            x.terms().iter().map(|t| (t.exp.to_string(), t.coeff)).collect();
        assert_eq!(
            terms,
            vec![("2".to_string(), 3), ("1".to_string(), 1), ("0".to_string(), 4)]
        );
    }

    #[test]
    fn parse_rejects_non_canonical() {
        assert!(matches!(
            Ordinal::parse("w+w"),
            Err(OrdError::NonDescendingExponents { .. })
        ));
        assert!(matches!(
            Ordinal::parse("3+w"),
            Err(OrdError::NonDescendingExponents { .. })
        ));
        assert!(matches!(Ordinal::parse("w*0"), Err(OrdError::Parse { .. })));
        assert!(matches!(Ordinal::parse("w+0"), Err(OrdError::Parse { .. })));
        assert!(matches!(Ordinal::parse(""), Err(OrdError::Parse { .. })));
        assert!(matches!(Ordinal::parse("w^"), Err(OrdError::Parse { .. })));
        assert!(matches!(Ordinal::parse("w^()"), Err(OrdError::Parse { .. })));
        assert!(matches!(Ordinal::parse("x"), Err(OrdError::Parse { .. })));
        assert!(matches!(Ordinal::parse("w w"), Err(OrdError::Parse { .. })));
    }

    #[test]
    fn parse_nat_guard() {
        assert!(matches!(
            Ordinal::parse("4294967296"),
            Err(OrdError::NatGuard { .. })
        ));
        assert_eq!(o("4294967295").as_nat(), Some((1 << 32) - 1));
    }

    #[test]
    fn display_round_trip_and_minimal_parens() {
        for s in [
            "0",
            "1",
            "17",
            "w",
            "w*3",
            "w+1",
            "w^2*3+w+4",
            "w^w",
            "w^w*2+w*3",
            "w^(w+1)",
            "w^(w^w)",
            "w^(w^2*2)+w^5+3",
            "w^5",
        ] {
            assert_eq!(o(s).to_string(), s, "round trip for {s}");
        }
        // Accepted non-minimal inputs normalize.
        assert_eq!(o("w^1*3").to_string(), "w*3");
        assert_eq!(o("w^(w)").to_string(), "w^w");
        assert_eq!(o("w^(5)").to_string(), "w^5");
        assert_eq!(o("w^0*4").to_string(), "4");
        assert_eq!(o(" w + 2 ").to_string(), "w+2");
    }

    #[test]
    fn order_examples() {
        assert!(o("0") < o("1"));
        assert!(o("17") < o("w"));
        assert!(o("w") < o("w+1"));
        assert!(o("w+1") < o("w*2"));
        assert!(o("w*2") < o("w^2"));
        assert!(o("w^2*3+w+4") < o("w^2*4"));
        assert!(o("w^2*3+w+4") < o("w^3"));
        assert!(o("w^w") > o("w^5*9+w^2"));
        assert!(o("w^(w+1)") > o("w^w*7+w^5"));
        assert_eq!(o("w^2*3+w+4"), o("w^2*3+w+4"));
    }

    #[test]
    fn add_examples() {
        assert_eq!(o("3").add(&o("w")), o("w"));
        assert_eq!(o("w").add(&o("3")), o("w+3"));
        assert_eq!(o("w^2+w").add(&o("w*2")), o("w^2+w*3"));
        assert_eq!(o("w^2+w+5").add(&o("w^2")), o("w^2*2"));
        assert_eq!(o("w").add(&o("0")), o("w"));
        assert_eq!(o("0").add(&o("w")), o("w"));
    }

    #[test]
    fn mul_omega_left_examples() {
        assert_eq!(o("w^w*2+3").mul_omega_left(), o("w^w*2+w*3"));
        assert_eq!(o("0").mul_omega_left(), o("0"));
        assert_eq!(o("1").mul_omega_left(), o("w"));
        assert_eq!(o("w").mul_omega_left(), o("w^2"));
        assert_eq!(o("w^w").mul_omega_left(), o("w^w"));
        assert_eq!(o("w^w*2").mul_omega_left(), o("w^w*2"));
        assert_eq!(o("w^(w+1)+w^w+w*2+7").mul_omega_left(), o("w^(w+1)+w^w+w^2*2+w*7"));
    }

    #[test]
    fn kind_and_succ() {
        assert_eq!(o("0").kind(), Kind::Zero);
        assert_eq!(o("5").kind(), Kind::Successor(o("4")));
        assert_eq!(o("w+1").kind(), Kind::Successor(o("w")));
        assert_eq!(o("w").kind(), Kind::Limit);
        assert_eq!(o("w^2*3").kind(), Kind::Limit);
        assert_eq!(o("w").succ(), o("w+1"));
    }

    #[test]
    fn fund_seq_examples() {
        assert_eq!(o("w").fund_seq(3).unwrap(), o("3"));
        assert_eq!(o("w").fund_seq(0).unwrap(), o("0"));
        assert_eq!(o("w^2").fund_seq(2).unwrap(), o("w*2"));
        assert_eq!(o("w^w").fund_seq(2).unwrap(), o("w^2"));
        assert_eq!(o("w^w").fund_seq(0).unwrap(), o("1"));
        assert_eq!(o("w*2").fund_seq(4).unwrap(), o("w+4"));
        assert_eq!(o("w^w*2").fund_seq(3).unwrap(), o("w^w+w^3"));
        assert_eq!(o("w^(w+1)").fund_seq(2).unwrap(), o("w^w*2"));
        assert!(matches!(o("0").fund_seq(1), Err(OrdError::NotALimit(_))));
        assert!(matches!(o("w+1").fund_seq(1), Err(OrdError::NotALimit(_))));
    }

    #[test]
    fn fund_seq_strictly_increasing_below_owner() {
        let lims = Limits::default();
        for s in ["w", "w*2", "w^2", "w^2*2+w", "w^w", "w^w*3", "w^(w+1)", "w^(w^w)"] {
            let lam = o(s);
            let mut prev: Option<Ordinal> = None;
            for n in 0..12 {
                let e = lam.fund_seq_with(n, &lims).unwrap();
                assert!(e < lam, "{s}[{n}] = {e} must sit below {s}");
                if let Some(p) = prev {
                    assert!(p < e, "{s} fund seq must strictly increase");
                }
                prev = Some(e);
            }
        }
    }

    #[test]
    fn c_count_and_c_step_examples() {
        let lims = Limits::default();
        // C_w = {0,1,2,...}: four elements below 4, and 4 itself is next.
        assert_eq!(c_count(&o("w"), &o("4"), &lims).unwrap(), 4);
        assert_eq!(c_step(&o("w"), &o("4"), &lims).unwrap(), o("4"));
        // C_{α+1} = {α}.
        let a = o("w^2+3");
        assert_eq!(c_count(&a.succ(), &a, &lims).unwrap(), 0);
        assert_eq!(c_step(&a.succ(), &a, &lims).unwrap(), a);
        // C_{w^2} = {0, w, w*2, ...}: two elements below w+1, step w*2.
        assert_eq!(c_count(&o("w^2"), &o("w+1"), &lims).unwrap(), 2);
        assert_eq!(c_step(&o("w^2"), &o("w+1"), &lims).unwrap(), o("w*2"));
        // Step lands exactly on α when α is on the sequence.
        assert_eq!(c_step(&o("w^2"), &o("w*2"), &lims).unwrap(), o("w*2"));
    }

    #[test]
    fn c_scan_diagnostics() {
        let lims = Limits::default();
        assert!(matches!(
            c_count(&o("w"), &o("w+1"), &lims),
            Err(OrdError::OrderViolation { .. })
        ));
        assert!(matches!(
            c_count(&o("w"), &o("w"), &lims),
            Err(OrdError::InfiniteCount { .. })
        ));
        // c_count at the diagonal is fine for successors: C_{σ+1} ∩ (σ+1) = {σ}.
        assert_eq!(c_count(&o("6"), &o("6"), &lims).unwrap(), 1);
        assert!(matches!(
            c_step(&o("w"), &o("w"), &lims),
            Err(OrdError::NoStep { .. })
        ));
        let tight = Limits { scan_limit: 3, ..Limits::default() };
        assert!(matches!(
            c_count(&o("w"), &o("10"), &tight),
            Err(OrdError::ScanLimit { .. })
        ));
    }

    #[test]
    fn c_below_and_step_matches_pieces() {
        let lims = Limits::default();
        let (below, step) = c_below_and_step(&o("w^2"), &o("w+1"), &lims).unwrap();
        assert_eq!(below, vec![o("0"), o("w")]);
        assert_eq!(step, o("w*2"));
        let (below, step) = c_below_and_step(&o("w+1"), &o("3"), &lims).unwrap();
        assert!(below.is_empty());
        assert_eq!(step, o("w"));
    }

    #[test]
    fn serde_uses_text_form() {
        let x = o("w^2*3+w+4");
        let j = serde_json::to_string(&x).unwrap();
        assert_eq!(j, "\"w^2*3+w+4\"");
        let back: Ordinal = serde_json::from_str(&j).unwrap();
        assert_eq!(back, x);
    }
}
