//! A hypersequentialized polarized calculus whose proofs compile to designs.
//!
//! Formulas are kept in a *positive normal form*: every formula is stored as
//! the positive side of its polarity pair, and a sum-of-tensors shape
//! `⊕_k ⊗_i (s_{k,i})⊥` where the slots `s` are again positive. The
//! down-shift `↓N` is the distinguished one-clause/one-slot case of the sum,
//! so `down`/`up`/`⊗`/`⊕`/`⊸` and the quantifiers over finite domains all
//! land in the same constructor and compare structurally.
//!
//! Sequents are `⊢ Γ` (all positive) or `q ⊢ Γ` (the positive `q` being
//! decomposed on the left, i.e. the sequent means `q⊥ ⊢ Γ`). Proofs carry
//! explicit focus/disjunct/routing data, are checked by [`check_proof`], and
//! compile to designs by [`proof_to_design`]: each disjunct `k` of a sum, of
//! arity `mₖ`, owns the ramification indices `offset(k) .. offset(k)+mₖ`, so
//! the design's addresses read off the formula's disjunct structure. Atom
//! axioms become lazily generated faxes; `open` leaves are either rejected
//! or, permissively, closed with the daimon (positive side) or the stuck
//! negative design.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Branch, Design, Fork, LazyGen, Locus, Polarity, Ram, RuleNode};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Errors raised by the calculus layer.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum HsError {
    /// The formula text failed to parse.
    #[error("PARSE: {detail} in `{text}`")]
    Parse { text: String, detail: String },
    /// A connective was applied to operands of the wrong polarity.
    #[error("POLARITY: {detail}")]
    Polarity { detail: String },
    /// A quantifier ranges over a domain that was not provided.
    #[error("UNBOUND_VARIABLE: no domain `{domain}` for variable `{var}`")]
    UnboundVariable { var: String, domain: String },
    /// Underlying JSON syntax error.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// A proof file named a rule this library does not know.
    #[error("UNKNOWN_RULE: `{name}`")]
    UnknownRule { name: String },
    /// A proof file was structurally malformed.
    #[error("BAD_PROOF_DOC: {detail}")]
    BadProofDoc { detail: String },
    /// The proof failed [`check_proof`].
    #[error("INVALID_PROOF: {detail}")]
    InvalidProof { detail: String },
    /// The proof has open leaves and permissive compilation was not asked.
    #[error("OPEN_LEAVES: proof has open leaves ({labels})")]
    OpenLeaves { labels: String },
    /// Compilation supports root sequents with at most one formula.
    #[error("MULTI_FORMULA_CONCLUSION: root sequent carries {n} formulas (at most one supported)")]
    MultiFormulaConclusion { n: usize },
    /// No built-in fixtures exist for the given formula.
    #[error("UNKNOWN_FIXTURE: no built-in fixtures for `{formula}`")]
    UnknownFixture { formula: String },
}

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

/// One tensor clause: the slots are stored positively; the clause denotes
/// `⊗_i (slotᵢ)⊥`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tensor(pub Vec<HsFormula>);

/// A formula in positive normal form.
///
/// `Plus(clauses)` denotes `⊕_k ⊗_i (s_{k,i})⊥`; the down-shift of a
/// negative formula is its one-clause/one-slot case (see
/// [`HsFormula::shift`]). A value paired with [`Polarity::Neg`] denotes the
/// dual of the stored formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum HsFormula {
    /// A positive atom, possibly applied to constants.
    Atom { name: String, args: Vec<String> },
    /// The tensor unit.
    One,
    /// Stored dual of the additive truth (only meaningful under a shift or a
    /// negative reading).
    Top,
    /// Sum of tensor clauses.
    Plus(Vec<Tensor>),
}

impl HsFormula {
    /// An atom without arguments.
    pub fn atom(name: &str) -> HsFormula {
        HsFormula::Atom {
            name: name.to_string(),
            args: Vec::new(),
        }
    }

    /// The down-shift `↓(q⊥)` of (the dual of) a positive formula: the
    /// distinguished one-clause/one-slot sum.
    pub fn shift(q: HsFormula) -> HsFormula {
        HsFormula::Plus(vec![Tensor(vec![q])])
    }

    /// If this is a one-clause/one-slot sum, its single slot.
    pub fn as_shift(&self) -> Option<&HsFormula> {
        match self {
            HsFormula::Plus(clauses) if clauses.len() == 1 && clauses[0].0.len() == 1 => {
                Some(&clauses[0].0[0])
            }
            _ => None,
        }
    }

    /// The clauses of a sum, if this formula is one.
    pub fn disjuncts(&self) -> Option<&[Tensor]> {
        match self {
            HsFormula::Plus(clauses) => Some(clauses),
            _ => None,
        }
    }
}

/// The ramification indices owned by each clause: clause `k` of arity `mₖ`
/// owns `offset(k) .. offset(k)+mₖ` with cumulative offsets.
pub fn clause_codes(clauses: &[Tensor]) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(clauses.len());
    let mut offset = 0u32;
    for clause in clauses {
        let arity = clause.0.len() as u32;
        out.push((offset..offset + arity).collect());
        offset += arity;
    }
    out
}

// ---------------------------------------------------------------------------
// Surface syntax
// ---------------------------------------------------------------------------

/// Finite first-order domains for quantifier expansion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteDomains(pub BTreeMap<String, Vec<String>>);

impl FiniteDomains {
    pub fn new() -> Self {
        FiniteDomains(BTreeMap::new())
    }

    pub fn insert<S: Into<String>>(&mut self, name: S, elements: Vec<String>) {
        self.0.insert(name.into(), elements);
    }

    pub fn get(&self, name: &str) -> Option<&[String]> {
        self.0.get(name).map(|v| v.as_slice())
    }
}

#[derive(Debug, Clone)]
enum Surface {
    Atom {
        name: String,
        args: Vec<String>,
    },
    One,
    Top,
    Dual(Box<Surface>),
    Down(Box<Surface>),
    Up(Box<Surface>),
    Times(Vec<Surface>),
    PlusSum(Vec<Surface>),
    Lolli(Box<Surface>, Box<Surface>),
    All {
        var: String,
        domain: String,
        body: Box<Surface>,
    },
    Exists {
        var: String,
        domain: String,
        body: Box<Surface>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Star,
    PlusSym,
    Tilde,
    Lolli,
    Colon,
    Dot,
}

fn lex(text: &str) -> Result<Vec<Tok>, HsError> {
    let err = |detail: &str| HsError::Parse {
        text: text.to_string(),
        detail: detail.to_string(),
    };
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                chars.next();
            }
            '(' => {
                chars.next();
                toks.push(Tok::LParen);
            }
            ')' => {
                chars.next();
                toks.push(Tok::RParen);
            }
            ',' => {
                chars.next();
                toks.push(Tok::Comma);
            }
            '*' => {
                chars.next();
                toks.push(Tok::Star);
            }
            '+' => {
                chars.next();
                toks.push(Tok::PlusSym);
            }
            '~' => {
                chars.next();
                toks.push(Tok::Tilde);
            }
            ':' => {
                chars.next();
                toks.push(Tok::Colon);
            }
            '.' => {
                chars.next();
                toks.push(Tok::Dot);
            }
            '-' => {
                chars.next();
                if chars.next() != Some('o') {
                    return Err(err("`-` must begin the arrow `-o`"));
                }
                toks.push(Tok::Lolli);
            }
            c if c.is_alphanumeric() || c == '_' || c == '\'' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '\'' {
                        ident.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Ident(ident));
            }
            other => return Err(err(&format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, detail: &str) -> HsError {
        HsError::Parse {
            text: self.text.to_string(),
            detail: detail.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), HsError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, HsError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(&format!("expected {what}"))),
        }
    }

    // formula := sum; sum := arrow (`+` arrow)*; arrow := product (`-o` arrow)?;
    // product := prefix (`*` prefix)*; prefix := `~`|`down`|`up` prefix
    //          | quantifier | atom.
    fn formula(&mut self) -> Result<Surface, HsError> {
        let mut summands = vec![self.arrow()?];
        while self.eat(&Tok::PlusSym) {
            summands.push(self.arrow()?);
        }
        Ok(if summands.len() == 1 {
            summands.pop().expect("one summand")
        } else {
            Surface::PlusSum(summands)
        })
    }

    fn arrow(&mut self) -> Result<Surface, HsError> {
        let lhs = self.product()?;
        if self.eat(&Tok::Lolli) {
            let rhs = self.arrow()?;
            Ok(Surface::Lolli(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn product(&mut self) -> Result<Surface, HsError> {
        let mut factors = vec![self.prefix()?];
        while self.eat(&Tok::Star) {
            factors.push(self.prefix()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            Surface::Times(factors)
        })
    }

    fn prefix(&mut self) -> Result<Surface, HsError> {
        if self.eat(&Tok::Tilde) {
            return Ok(Surface::Dual(Box::new(self.prefix()?)));
        }
        if let Some(Tok::Ident(word)) = self.peek() {
            match word.as_str() {
                "down" => {
                    self.pos += 1;
                    return Ok(Surface::Down(Box::new(self.prefix()?)));
                }
                "up" => {
                    self.pos += 1;
                    return Ok(Surface::Up(Box::new(self.prefix()?)));
                }
                "all" | "some" => return self.quantifier(),
                _ => {}
            }
        }
        self.atom()
    }

    fn quantifier(&mut self) -> Result<Surface, HsError> {
        let kind = self.ident("quantifier")?;
        let var = self.ident("a bound variable")?;
        self.expect(&Tok::Colon, "`:` after the bound variable")?;
        let domain = self.ident("a domain name")?;
        self.expect(&Tok::Dot, "`.` after the domain")?;
        let body = Box::new(self.formula()?);
        Ok(match kind.as_str() {
            "all" => Surface::All { var, domain, body },
            _ => Surface::Exists { var, domain, body },
        })
    }

    fn atom(&mut self) -> Result<Surface, HsError> {
        if self.eat(&Tok::LParen) {
            let inner = self.formula()?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(inner);
        }
        let name = self.ident("a formula")?;
        match name.as_str() {
            "1" => return Ok(Surface::One),
            "T" => return Ok(Surface::Top),
            "down" | "up" | "all" | "some" => {
                return Err(self.err(&format!("`{name}` cannot stand alone")))
            }
            _ => {}
        }
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.ident("an argument")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RParen, "`)` after arguments")?;
        }
        Ok(Surface::Atom { name, args })
    }
}

fn parse_surface(text: &str) -> Result<Surface, HsError> {
    let toks = lex(text)?;
    let mut parser = Parser { text, toks, pos: 0 };
    let f = parser.formula()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Translation to positive normal form
// ---------------------------------------------------------------------------

/// The tensor clauses a formula contributes when standing as a summand.
///
/// Negative formulas contribute their stored positive as a single slot; sums
/// flatten; other positives are shifted up first, so `a + b` reads as
/// `↑a ⊕ ↑b`.
fn summand_clauses(q: HsFormula, pol: Polarity) -> Vec<Tensor> {
    match (pol, q) {
        (Polarity::Neg, q) => vec![Tensor(vec![q])],
        (Polarity::Pos, HsFormula::Plus(clauses)) => clauses,
        (Polarity::Pos, q) => vec![Tensor(vec![HsFormula::shift(q)])],
    }
}

fn translate(
    s: &Surface,
    env: &BTreeMap<String, String>,
    domains: &FiniteDomains,
) -> Result<(HsFormula, Polarity), HsError> {
    match s {
        Surface::Atom { name, args } => {
            let args = args
                .iter()
                .map(|a| env.get(a).cloned().unwrap_or_else(|| a.clone()))
                .collect();
            Ok((
                HsFormula::Atom {
                    name: name.clone(),
                    args,
                },
                Polarity::Pos,
            ))
        }
        Surface::One => Ok((HsFormula::One, Polarity::Pos)),
        Surface::Top => Ok((HsFormula::Top, Polarity::Neg)),
        Surface::Dual(inner) => {
            let (q, pol) = translate(inner, env, domains)?;
            Ok((q, pol.flip()))
        }
        Surface::Down(inner) => {
            let (q, pol) = translate(inner, env, domains)?;
            if pol != Polarity::Neg {
                return Err(HsError::Polarity {
                    detail: format!(
                        "`down` needs a negative formula, got positive `{}`",
                        render_formula(&q, pol)
                    ),
                });
            }
            Ok((HsFormula::shift(q), Polarity::Pos))
        }
        Surface::Up(inner) => {
            let (q, pol) = translate(inner, env, domains)?;
            if pol != Polarity::Pos {
                return Err(HsError::Polarity {
                    detail: format!(
                        "`up` needs a positive formula, got negative `{}`",
                        render_formula(&q, pol)
                    ),
                });
            }
            Ok((HsFormula::shift(q), Polarity::Neg))
        }
        Surface::Times(factors) => {
            let mut slots = Vec::with_capacity(factors.len());
            for f in factors {
                let (q, pol) = translate(f, env, domains)?;
                if pol != Polarity::Neg {
                    return Err(HsError::Polarity {
                        detail: format!(
                            "`*` needs negative factors, got positive `{}`",
                            render_formula(&q, pol)
                        ),
                    });
                }
                slots.push(q);
            }
            Ok((HsFormula::Plus(vec![Tensor(slots)]), Polarity::Pos))
        }
        Surface::Lolli(a, b) => {
            let (qa, pa) = translate(a, env, domains)?;
            if pa != Polarity::Neg {
                return Err(HsError::Polarity {
                    detail: format!(
                        "`-o` needs a negative antecedent, got positive `{}`",
                        render_formula(&qa, pa)
                    ),
                });
            }
            let (qb, pb) = translate(b, env, domains)?;
            if pb != Polarity::Pos {
                return Err(HsError::Polarity {
                    detail: format!(
                        "`-o` needs a positive consequent, got negative `{}`",
                        render_formula(&qb, pb)
                    ),
                });
            }
            Ok((HsFormula::Plus(vec![Tensor(vec![qa, qb])]), Polarity::Neg))
        }
        Surface::PlusSum(summands) => {
            let mut clauses = Vec::new();
            for s in summands {
                let (q, pol) = translate(s, env, domains)?;
                clauses.extend(summand_clauses(q, pol));
            }
            Ok((HsFormula::Plus(clauses), Polarity::Pos))
        }
        Surface::Exists { var, domain, body } => {
            let mut clauses = Vec::new();
            for value in domain_values(var, domain, domains)? {
                let mut env = env.clone();
                env.insert(var.clone(), value);
                let (q, pol) = translate(body, &env, domains)?;
                clauses.extend(summand_clauses(q, pol));
            }
            Ok((HsFormula::Plus(clauses), Polarity::Pos))
        }
        Surface::All { var, domain, body } => {
            // ∀x F is negative; its stored positive is the sum of the duals
            // of the instances.
            let mut clauses = Vec::new();
            for value in domain_values(var, domain, domains)? {
                let mut env = env.clone();
                env.insert(var.clone(), value);
                let (q, pol) = translate(body, &env, domains)?;
                match pol {
                    // The dual of a negative instance is its stored positive.
                    Polarity::Neg => clauses.extend(summand_clauses(q, Polarity::Pos)),
                    // The dual of a positive instance is negative: one slot.
                    Polarity::Pos => clauses.push(Tensor(vec![q])),
                }
            }
            Ok((HsFormula::Plus(clauses), Polarity::Neg))
        }
    }
}

fn domain_values(var: &str, domain: &str, domains: &FiniteDomains) -> Result<Vec<String>, HsError> {
    domains
        .get(domain)
        .map(|v| v.to_vec())
        .ok_or_else(|| HsError::UnboundVariable {
            var: var.to_string(),
            domain: domain.to_string(),
        })
}

/// Parses a quantifier-free formula into positive normal form with its
/// surface polarity.
///
/// # Examples
///
/// ```
/// use ludics_core::core::Polarity;
/// use ludics_core::hscalc::{parse_formula, HsFormula};
///
/// let (q, pol) = parse_formula("down ~P").unwrap();
/// assert_eq!(pol, Polarity::Pos);
/// assert_eq!(q, HsFormula::shift(HsFormula::atom("P")));
/// ```
pub fn parse_formula(text: &str) -> Result<(HsFormula, Polarity), HsError> {
    expand_quantifiers(text, &FiniteDomains::new())
}

/// Parses a formula and grounds its quantifiers over the given finite
/// domains (`all` folds to the dual sum of instances, `some` to the sum).
pub fn expand_quantifiers(
    text: &str,
    domains: &FiniteDomains,
) -> Result<(HsFormula, Polarity), HsError> {
    let surface = parse_surface(text)?;
    translate(&surface, &BTreeMap::new(), domains)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn needs_wrap(s: &str) -> bool {
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ' ' | '*' | '+' if depth == 0 => return true,
            _ => {}
        }
    }
    false
}

fn wrap(s: String) -> String {
    if needs_wrap(&s) {
        format!("({s})")
    } else {
        s
    }
}

fn render_atom(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.join(","))
    }
}

fn render_pos(q: &HsFormula) -> String {
    match q {
        HsFormula::Atom { name, args } => render_atom(name, args),
        HsFormula::One => "1".to_string(),
        HsFormula::Top => "~T".to_string(),
        HsFormula::Plus(_) => {
            if let Some(slot) = q.as_shift() {
                return format!("down {}", wrap(render_neg(slot)));
            }
            let clauses = q.disjuncts().expect("plus");
            clauses
                .iter()
                .map(|clause| {
                    clause
                        .0
                        .iter()
                        .map(|slot| wrap(render_neg(slot)))
                        .collect::<Vec<_>>()
                        .join(" * ")
                })
                .collect::<Vec<_>>()
                .join(" + ")
        }
    }
}

fn render_neg(q: &HsFormula) -> String {
    match q {
        HsFormula::Atom { name, args } => format!("~{}", render_atom(name, args)),
        HsFormula::One => "~1".to_string(),
        HsFormula::Top => "T".to_string(),
        HsFormula::Plus(_) => {
            if let Some(slot) = q.as_shift() {
                return format!("up {}", wrap(render_pos(slot)));
            }
            format!("~({})", render_pos(q))
        }
    }
}

/// Renders a formula back to surface text; parsing the result returns the
/// identical normal form and polarity.
pub fn render_formula(q: &HsFormula, pol: Polarity) -> String {
    match pol {
        Polarity::Pos => render_pos(q),
        Polarity::Neg => render_neg(q),
    }
}

// ---------------------------------------------------------------------------
// Sequents and proofs
// ---------------------------------------------------------------------------

/// A sequent `⊢ Γ` or `q ⊢ Γ`. The left slot stores the positive `q` being
/// decomposed; the sequent reads `q⊥ ⊢ Γ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HsSequent {
    pub left: Option<HsFormula>,
    pub right: Vec<HsFormula>,
}

impl HsSequent {
    pub fn right_only(right: Vec<HsFormula>) -> HsSequent {
        HsSequent { left: None, right }
    }
}

impl fmt::Display for HsSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = &self.left {
            write!(f, "{} ", render_neg(q))?;
        }
        write!(f, "|-")?;
        for (k, q) in self.right.iter().enumerate() {
            if k == 0 {
                write!(f, " {}", render_pos(q))?;
            } else {
                write!(f, ", {}", render_pos(q))?;
            }
        }
        Ok(())
    }
}

/// The rules of the calculus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HsRule {
    /// `q ⊢ q` for an atom `q` (compiled as a fax).
    AtomAxiom,
    /// `⊢ 1`.
    OneAxiom,
    /// `⊢ Γ` when some member of `Γ` is `down T`.
    TopAxiom,
    /// `⊢ q` for an atomic fact taken as a non-logical axiom.
    DataAxiom,
    /// The daimon closes any positive sequent.
    DaimonRule,
    /// Focus `right[focus]`, pick clause `disjunct`, and split the context:
    /// `routing[i]` lists the indices (into `Γ` minus the focus) handed to
    /// premise `i`. One premise per slot, `slotᵢ ⊢ Γᵢ`.
    PositiveRule {
        focus: usize,
        disjunct: usize,
        routing: Vec<Vec<usize>>,
    },
    /// Decompose the left formula: one premise per clause, `⊢ slots, Γ`.
    NegativeRule,
    /// The one-slot positive rule on a shift, keeping the whole context.
    ShiftPos { focus: usize },
    /// The one-clause negative rule on a shift.
    ShiftNeg,
    /// An open leaf: any sequent, no premises.
    Open { label: String },
}

impl HsRule {
    fn name(&self) -> &'static str {
        match self {
            HsRule::AtomAxiom => "atom-axiom",
            HsRule::OneAxiom => "one-axiom",
            HsRule::TopAxiom => "top-axiom",
            HsRule::DataAxiom => "data-axiom",
            HsRule::DaimonRule => "daimon",
            HsRule::PositiveRule { .. } => "positive",
            HsRule::NegativeRule => "negative",
            HsRule::ShiftPos { .. } => "shift-pos",
            HsRule::ShiftNeg => "shift-neg",
            HsRule::Open { .. } => "open",
        }
    }
}

/// A proof tree: a conclusion, the rule deriving it, and its premises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsProof {
    pub conclusion: HsSequent,
    pub rule: HsRule,
    pub premises: Vec<HsProof>,
}

impl HsProof {
    /// Number of rule layers along the deepest path.
    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(HsProof::depth).max().unwrap_or(0)
    }
}

// ---------------------------------------------------------------------------
// Proof checking
// ---------------------------------------------------------------------------

/// One checking finding, locating the proof node by a path.
#[derive(Debug, Clone)]
pub struct HsViolation {
    pub code: &'static str,
    pub at: String,
    pub detail: String,
}

impl fmt::Display for HsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.at, self.detail)
    }
}

/// The outcome of checking a proof.
#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    /// No violations were found (open leaves do not invalidate).
    pub valid: bool,
    /// Labels (or sequents) of open leaves.
    pub open: Vec<String>,
    /// Whether any daimon rule occurs.
    pub uses_daimon: bool,
    pub violations: Vec<HsViolation>,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.valid { "valid" } else { "invalid" })?;
        if !self.open.is_empty() {
            writeln!(f, "open leaves: {}", self.open.join(", "))?;
        }
        if self.uses_daimon {
            writeln!(f, "uses the daimon")?;
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        Ok(())
    }
}

fn same_multiset(a: &[HsFormula], b: &[HsFormula]) -> bool {
    let mut a: Vec<&HsFormula> = a.iter().collect();
    let mut b: Vec<&HsFormula> = b.iter().collect();
    a.sort();
    b.sort();
    a == b
}

struct Checker {
    report: CheckReport,
}

impl Checker {
    fn violate(&mut self, code: &'static str, at: &str, detail: String) {
        self.report.violations.push(HsViolation {
            code,
            at: at.to_string(),
            detail,
        });
    }

    fn expect_premises(&mut self, p: &HsProof, n: usize, at: &str) -> bool {
        if p.premises.len() != n {
            self.violate(
                "PREMISE_COUNT",
                at,
                format!(
                    "{} expects {n} premises, found {}",
                    p.rule.name(),
                    p.premises.len()
                ),
            );
            false
        } else {
            true
        }
    }

    fn expect_sequent(&mut self, found: &HsSequent, want: &HsSequent, at: &str) {
        let left_ok = found.left == want.left;
        let right_ok = same_multiset(&found.right, &want.right);
        if !left_ok || !right_ok {
            self.violate(
                "PREMISE_SEQUENT",
                at,
                format!("premise states `{found}`, rule requires `{want}`"),
            );
        }
    }

    fn check(&mut self, p: &HsProof, at: &str) {
        let c = &p.conclusion;
        match &p.rule {
            HsRule::AtomAxiom => {
                self.expect_premises(p, 0, at);
                let ok = matches!(&c.left, Some(HsFormula::Atom { .. }))
                    && c.right.len() == 1
                    && c.left.as_ref() == Some(&c.right[0]);
                if !ok {
                    self.violate(
                        "BAD_AXIOM",
                        at,
                        format!("atom axiom requires `q |- q` for an atom, got `{c}`"),
                    );
                }
            }
            HsRule::OneAxiom => {
                self.expect_premises(p, 0, at);
                if c.left.is_some() || c.right != [HsFormula::One] {
                    self.violate(
                        "BAD_AXIOM",
                        at,
                        format!("one axiom requires `|- 1`, got `{c}`"),
                    );
                }
            }
            HsRule::TopAxiom => {
                self.expect_premises(p, 0, at);
                let has_top = c
                    .right
                    .iter()
                    .any(|q| q.as_shift() == Some(&HsFormula::Top));
                if !has_top {
                    self.violate(
                        "BAD_AXIOM",
                        at,
                        format!("top axiom requires `down T` on the right, got `{c}`"),
                    );
                }
            }
            HsRule::DataAxiom => {
                self.expect_premises(p, 0, at);
                let ok = c.left.is_none()
                    && c.right.len() == 1
                    && matches!(c.right[0], HsFormula::Atom { .. });
                if !ok {
                    self.violate(
                        "BAD_AXIOM",
                        at,
                        format!("data axiom requires `|- q` for an atom, got `{c}`"),
                    );
                }
            }
            HsRule::DaimonRule => {
                self.expect_premises(p, 0, at);
                self.report.uses_daimon = true;
                if c.left.is_some() {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        "the daimon closes positive sequents only".to_string(),
                    );
                }
            }
            HsRule::Open { label } => {
                self.expect_premises(p, 0, at);
                let entry = if label.is_empty() {
                    c.to_string()
                } else {
                    label.clone()
                };
                self.report.open.push(entry);
            }
            HsRule::PositiveRule {
                focus,
                disjunct,
                routing,
            } => {
                if c.left.is_some() {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        "positive rule applies to a positive sequent".to_string(),
                    );
                    return;
                }
                let Some(q) = c.right.get(*focus) else {
                    self.violate(
                        "FOCUS_RANGE",
                        at,
                        format!("focus {focus} out of range for `{c}`"),
                    );
                    return;
                };
                let Some(clauses) = q.disjuncts() else {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        format!("`{}` has no clauses to focus", render_pos(q)),
                    );
                    return;
                };
                let Some(clause) = clauses.get(*disjunct) else {
                    self.violate(
                        "DISJUNCT_RANGE",
                        at,
                        format!(
                            "disjunct {disjunct} out of range ({} clauses)",
                            clauses.len()
                        ),
                    );
                    return;
                };
                let slots = &clause.0;
                let gamma: Vec<&HsFormula> = c
                    .right
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| k != focus)
                    .map(|(_, f)| f)
                    .collect();
                let routing_eff: Vec<Vec<usize>> = if routing.is_empty() && !slots.is_empty() {
                    vec![Vec::new(); slots.len()]
                } else {
                    routing.clone()
                };
                if routing_eff.len() != slots.len() {
                    self.violate(
                        "ROUTING_RANGE",
                        at,
                        format!(
                            "routing covers {} premises, clause has {} slots",
                            routing_eff.len(),
                            slots.len()
                        ),
                    );
                    return;
                }
                let mut seen = BTreeSet::new();
                for indices in &routing_eff {
                    for &k in indices {
                        if k >= gamma.len() {
                            self.violate(
                                "ROUTING_RANGE",
                                at,
                                format!(
                                    "routing index {k} out of range ({} context formulas)",
                                    gamma.len()
                                ),
                            );
                            return;
                        }
                        if !seen.insert(k) {
                            self.violate(
                                "ROUTING_OVERLAP",
                                at,
                                format!("context formula {k} routed to two premises"),
                            );
                        }
                    }
                }
                if !self.expect_premises(p, slots.len(), at) {
                    return;
                }
                for (i, premise) in p.premises.iter().enumerate() {
                    let want = HsSequent {
                        left: Some(slots[i].clone()),
                        right: routing_eff[i].iter().map(|&k| gamma[k].clone()).collect(),
                    };
                    let sub = format!("{at}/premise {i}");
                    self.expect_sequent(&premise.conclusion, &want, &sub);
                    self.check(premise, &sub);
                }
            }
            HsRule::NegativeRule => {
                let Some(q) = &c.left else {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        "negative rule needs a left formula".to_string(),
                    );
                    return;
                };
                let Some(clauses) = q.disjuncts() else {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        format!("`{}` has no clauses to decompose", render_neg(q)),
                    );
                    return;
                };
                if !self.expect_premises(p, clauses.len(), at) {
                    return;
                }
                for (k, premise) in p.premises.iter().enumerate() {
                    let mut right = clauses[k].0.clone();
                    right.extend(c.right.iter().cloned());
                    let want = HsSequent::right_only(right);
                    let sub = format!("{at}/premise {k}");
                    self.expect_sequent(&premise.conclusion, &want, &sub);
                    self.check(premise, &sub);
                }
            }
            HsRule::ShiftPos { focus } => {
                if c.left.is_some() {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        "shift rule applies to a positive sequent".to_string(),
                    );
                    return;
                }
                let Some(q) = c.right.get(*focus) else {
                    self.violate(
                        "FOCUS_RANGE",
                        at,
                        format!("focus {focus} out of range for `{c}`"),
                    );
                    return;
                };
                let Some(slot) = q.as_shift() else {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        format!("`{}` is not a shift", render_pos(q)),
                    );
                    return;
                };
                if !self.expect_premises(p, 1, at) {
                    return;
                }
                let want = HsSequent {
                    left: Some(slot.clone()),
                    right: c
                        .right
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| k != focus)
                        .map(|(_, f)| f.clone())
                        .collect(),
                };
                let sub = format!("{at}/premise 0");
                self.expect_sequent(&p.premises[0].conclusion, &want, &sub);
                self.check(&p.premises[0], &sub);
            }
            HsRule::ShiftNeg => {
                let Some(q) = &c.left else {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        "shift rule needs a left formula".to_string(),
                    );
                    return;
                };
                let Some(slot) = q.as_shift() else {
                    self.violate(
                        "RULE_MISMATCH",
                        at,
                        format!("`{}` is not a shift", render_neg(q)),
                    );
                    return;
                };
                if !self.expect_premises(p, 1, at) {
                    return;
                }
                let mut right = vec![slot.clone()];
                right.extend(c.right.iter().cloned());
                let want = HsSequent::right_only(right);
                let sub = format!("{at}/premise 0");
                self.expect_sequent(&p.premises[0].conclusion, &want, &sub);
                self.check(&p.premises[0], &sub);
            }
        }
    }
}

/// Checks every rule application in a proof. Open leaves are collected, not
/// flagged; `valid` means no violation was found anywhere.
pub fn check_proof(p: &HsProof) -> CheckReport {
    let mut checker = Checker {
        report: CheckReport::default(),
    };
    checker.check(p, "proof");
    checker.report.valid = checker.report.violations.is_empty();
    checker.report
}

// ---------------------------------------------------------------------------
// Proof JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SequentDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    left: Vec<String>,
    #[serde(default)]
    right: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ProofNodeDoc {
    conclusion: SequentDoc,
    rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    focus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disjunct: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    routing: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    premises: Vec<ProofNodeDoc>,
}

fn sequent_from_doc(doc: &SequentDoc, domains: &FiniteDomains) -> Result<HsSequent, HsError> {
    if doc.left.len() > 1 {
        return Err(HsError::BadProofDoc {
            detail: format!(
                "a sequent has {} left formulas (at most one allowed)",
                doc.left.len()
            ),
        });
    }
    // Left entries accept either polarity reading: both store the positive.
    let left = match doc.left.first() {
        Some(text) => Some(expand_quantifiers(text, domains)?.0),
        None => None,
    };
    let mut right = Vec::with_capacity(doc.right.len());
    for text in &doc.right {
        let (q, pol) = expand_quantifiers(text, domains)?;
        if pol != Polarity::Pos {
            return Err(HsError::Polarity {
                detail: format!("right-hand formulas must be positive, got `{text}`"),
            });
        }
        right.push(q);
    }
    Ok(HsSequent { left, right })
}

fn proof_from_doc(doc: &ProofNodeDoc, domains: &FiniteDomains) -> Result<HsProof, HsError> {
    let conclusion = sequent_from_doc(&doc.conclusion, domains)?;
    let rule = match doc.rule.as_str() {
        "atom-axiom" => HsRule::AtomAxiom,
        "one-axiom" => HsRule::OneAxiom,
        "top-axiom" => HsRule::TopAxiom,
        "data-axiom" => HsRule::DataAxiom,
        "daimon" => HsRule::DaimonRule,
        "negative" => HsRule::NegativeRule,
        "shift-neg" => HsRule::ShiftNeg,
        "shift-pos" => HsRule::ShiftPos {
            focus: doc.focus.unwrap_or(0),
        },
        "positive" => HsRule::PositiveRule {
            focus: doc.focus.unwrap_or(0),
            disjunct: doc.disjunct.unwrap_or(0),
            routing: doc.routing.clone().unwrap_or_default(),
        },
        "open" => HsRule::Open {
            label: doc.label.clone().unwrap_or_default(),
        },
        other => {
            return Err(HsError::UnknownRule {
                name: other.to_string(),
            })
        }
    };
    let premises = doc
        .premises
        .iter()
        .map(|p| proof_from_doc(p, domains))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HsProof {
        conclusion,
        rule,
        premises,
    })
}

fn proof_to_doc(p: &HsProof) -> ProofNodeDoc {
    let (focus, disjunct, routing, label) = match &p.rule {
        HsRule::PositiveRule {
            focus,
            disjunct,
            routing,
        } => (Some(*focus), Some(*disjunct), Some(routing.clone()), None),
        HsRule::ShiftPos { focus } => (Some(*focus), None, None, None),
        HsRule::Open { label } => (None, None, None, Some(label.clone())),
        _ => (None, None, None, None),
    };
    ProofNodeDoc {
        conclusion: SequentDoc {
            left: p.conclusion.left.iter().map(render_neg).collect(),
            right: p.conclusion.right.iter().map(render_pos).collect(),
        },
        rule: p.rule.name().to_string(),
        focus,
        disjunct,
        routing,
        label,
        premises: p.premises.iter().map(proof_to_doc).collect(),
    }
}

impl HsProof {
    /// Reads a proof from JSON: either a bare proof node, or an object
    /// `{"domains": {...}, "proof": node}` whose domains ground every
    /// quantifier at load time.
    pub fn from_json_str(text: &str) -> Result<HsProof, HsError> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let (node, domains) = if let Some(proof) = v.get("proof") {
            let mut domains = FiniteDomains::new();
            if let Some(map) = v.get("domains") {
                let map: BTreeMap<String, Vec<String>> = serde_json::from_value(map.clone())?;
                for (name, values) in map {
                    domains.insert(name, values);
                }
            }
            (proof.clone(), domains)
        } else {
            (v, FiniteDomains::new())
        };
        let doc: ProofNodeDoc = serde_json::from_value(node)?;
        proof_from_doc(&doc, &domains)
    }

    /// Serializes the proof as a bare node (quantifiers already grounded).
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(proof_to_doc(self)).expect("proof serialization cannot fail")
    }

    /// Pretty-printed JSON text of the proof.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value())
            .expect("proof serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Compilation to designs
// ---------------------------------------------------------------------------

/// Bound used for the faxes that atom axioms compile to.
const ATOM_FAX_BOUND: [u32; 2] = [0, 1];

/// Compiles a checked proof into a design rooted at `root`.
///
/// The root sequent must carry at most one formula (`⊢ A` becomes a design
/// on `⊢ root`, `A ⊢` one on `root ⊢`). Inside, disjunct `k` slot `i` of a
/// focused formula creates the address `ℓ⋆(offset(k)+i)`. Atom axioms
/// compile to lazily generated faxes between their two addresses. Open
/// leaves abort the compilation unless `permissive` is set, in which case a
/// positive open leaf becomes the daimon and a negative one the stuck
/// design.
pub fn proof_to_design(p: &HsProof, root: &Locus, permissive: bool) -> Result<Design, HsError> {
    let report = check_proof(p);
    if !report.valid {
        let detail = report
            .violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(HsError::InvalidProof { detail });
    }
    if !permissive && !report.open.is_empty() {
        return Err(HsError::OpenLeaves {
            labels: report.open.join(", "),
        });
    }
    let total = usize::from(p.conclusion.left.is_some()) + p.conclusion.right.len();
    if total > 1 {
        return Err(HsError::MultiFormulaConclusion { n: total });
    }
    if let Some(q) = &p.conclusion.left {
        let tree = compile(p, Some((q, root)), &[], permissive)?;
        Ok(Design {
            base: Fork::negative(root.clone(), []),
            root: tree,
        })
    } else if let Some(q) = p.conclusion.right.first() {
        let tree = compile(p, None, &[(q.clone(), root.clone())], permissive)?;
        Ok(Design {
            base: Fork::positive([root.clone()]),
            root: tree,
        })
    } else {
        let tree = compile(p, None, &[], permissive)?;
        Ok(Design {
            base: Fork::positive([]),
            root: tree,
        })
    }
}

/// Reorders computed (formula, locus) pairs to follow the premise's own
/// statement of its right side (the checker guarantees multiset equality).
fn align(premise: &HsSequent, mut computed: Vec<(HsFormula, Locus)>) -> Vec<(HsFormula, Locus)> {
    let mut out = Vec::with_capacity(computed.len());
    for f in &premise.right {
        let k = computed
            .iter()
            .position(|(g, _)| g == f)
            .expect("premise sequents were checked");
        out.push(computed.remove(k));
    }
    out
}

fn compile(
    p: &HsProof,
    left: Option<(&HsFormula, &Locus)>,
    right: &[(HsFormula, Locus)],
    permissive: bool,
) -> Result<RuleNode, HsError> {
    match &p.rule {
        HsRule::DaimonRule => Ok(RuleNode::Daimon),
        HsRule::OneAxiom | HsRule::DataAxiom => {
            let (_, locus) = &right[0];
            Ok(RuleNode::Pos {
                focus: locus.clone(),
                ram: Ram::empty(),
                premises: BTreeMap::new(),
                ctx: BTreeMap::new(),
            })
        }
        HsRule::TopAxiom => {
            let (_, locus) = right
                .iter()
                .find(|(q, _)| q.as_shift() == Some(&HsFormula::Top))
                .expect("top axiom was checked");
            Ok(RuleNode::Pos {
                focus: locus.clone(),
                ram: Ram::from_iter([0]),
                premises: BTreeMap::from([(
                    0,
                    RuleNode::Neg {
                        anchor: locus.child(0),
                        branches: BTreeMap::new(),
                    },
                )]),
                ctx: BTreeMap::from([(0, BTreeSet::new())]),
            })
        }
        HsRule::AtomAxiom => {
            let (_, l) = left.expect("atom axiom was checked");
            let (_, r) = &right[0];
            Ok(RuleNode::Lazy(LazyGen::Fax {
                left: l.clone(),
                right: r.clone(),
                ram_bound: Ram::from_iter(ATOM_FAX_BOUND),
            }))
        }
        HsRule::Open { .. } => {
            debug_assert!(permissive, "open leaves rejected earlier");
            match left {
                Some((_, l)) => Ok(RuleNode::Neg {
                    anchor: l.clone(),
                    branches: BTreeMap::new(),
                }),
                None => Ok(RuleNode::Daimon),
            }
        }
        HsRule::PositiveRule {
            focus,
            disjunct,
            routing,
        } => {
            let (q, locus) = &right[*focus];
            let clauses = q.disjuncts().expect("positive rule was checked");
            let codes = clause_codes(clauses);
            let slots = &clauses[*disjunct].0;
            let my_codes = &codes[*disjunct];
            let gamma: Vec<&(HsFormula, Locus)> = right
                .iter()
                .enumerate()
                .filter(|(k, _)| k != focus)
                .map(|(_, pair)| pair)
                .collect();
            let routing_eff: Vec<Vec<usize>> = if routing.is_empty() && !slots.is_empty() {
                vec![Vec::new(); slots.len()]
            } else {
                routing.clone()
            };
            let mut premises = BTreeMap::new();
            let mut ctx = BTreeMap::new();
            for (i, premise) in p.premises.iter().enumerate() {
                let code = my_codes[i];
                let child_locus = locus.child(code);
                let computed: Vec<(HsFormula, Locus)> =
                    routing_eff[i].iter().map(|&k| gamma[k].clone()).collect();
                let child_right = align(&premise.conclusion, computed);
                ctx.insert(code, child_right.iter().map(|(_, l)| l.clone()).collect());
                let sub = compile(
                    premise,
                    Some((&slots[i], &child_locus)),
                    &child_right,
                    permissive,
                )?;
                premises.insert(code, sub);
            }
            Ok(RuleNode::Pos {
                focus: locus.clone(),
                ram: Ram::from_iter(my_codes.iter().copied()),
                premises,
                ctx,
            })
        }
        HsRule::NegativeRule => {
            let (q, locus) = left.expect("negative rule was checked");
            let clauses = q.disjuncts().expect("negative rule was checked");
            let codes = clause_codes(clauses);
            let mut branches = BTreeMap::new();
            for (k, premise) in p.premises.iter().enumerate() {
                let mut computed: Vec<(HsFormula, Locus)> = clauses[k]
                    .0
                    .iter()
                    .zip(&codes[k])
                    .map(|(slot, &code)| (slot.clone(), locus.child(code)))
                    .collect();
                computed.extend(right.iter().cloned());
                let child_right = align(&premise.conclusion, computed);
                let tree = compile(premise, None, &child_right, permissive)?;
                branches.insert(
                    Ram::from_iter(codes[k].iter().copied()),
                    Branch {
                        tree,
                        ctx: right.iter().map(|(_, l)| l.clone()).collect(),
                    },
                );
            }
            Ok(RuleNode::Neg {
                anchor: locus.clone(),
                branches,
            })
        }
        HsRule::ShiftPos { focus } => {
            let (q, locus) = &right[*focus];
            let slot = q.as_shift().expect("shift was checked");
            let computed: Vec<(HsFormula, Locus)> = right
                .iter()
                .enumerate()
                .filter(|(k, _)| k != focus)
                .map(|(_, pair)| pair.clone())
                .collect();
            let child_right = align(&p.premises[0].conclusion, computed);
            let child_locus = locus.child(0);
            let ctx_set: BTreeSet<Locus> = child_right.iter().map(|(_, l)| l.clone()).collect();
            let sub = compile(
                &p.premises[0],
                Some((slot, &child_locus)),
                &child_right,
                permissive,
            )?;
            Ok(RuleNode::Pos {
                focus: locus.clone(),
                ram: Ram::from_iter([0]),
                premises: BTreeMap::from([(0, sub)]),
                ctx: BTreeMap::from([(0, ctx_set)]),
            })
        }
        HsRule::ShiftNeg => {
            let (q, locus) = left.expect("shift was checked");
            let slot = q.as_shift().expect("shift was checked");
            let mut computed = vec![(slot.clone(), locus.child(0))];
            computed.extend(right.iter().cloned());
            let child_right = align(&p.premises[0].conclusion, computed);
            let tree = compile(&p.premises[0], None, &child_right, permissive)?;
            Ok(RuleNode::Neg {
                anchor: locus.clone(),
                branches: BTreeMap::from([(
                    Ram::from_iter([0]),
                    Branch {
                        tree,
                        ctx: right.iter().map(|(_, l)| l.clone()).collect(),
                    },
                )]),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Built-in formula fixtures
// ---------------------------------------------------------------------------

/// A named proof with its compiled design.
#[derive(Debug, Clone)]
pub struct FixturePair {
    pub name: String,
    pub proof: HsProof,
    pub design: Design,
}

/// The built-in proofs attached to the ambiguous-assertion formula: the
/// stuck attempt `D`, its completion `Dprime`, and the opponent reading `E`.
/// Any other formula is `UNKNOWN_FIXTURE`.
pub fn formula_fixture(formula: &HsFormula, root: &Locus) -> Result<Vec<FixturePair>, HsError> {
    let (reference, _) = expand_quantifiers(
        crate::fixtures::AMBIGUOUS_SENTENCE,
        &crate::fixtures::sentence_domains(),
    )?;
    if *formula != reference {
        return Err(HsError::UnknownFixture {
            formula: render_pos(formula),
        });
    }
    let mut out = Vec::new();
    for (name, json, permissive) in [
        ("D", crate::fixtures::S_ATTEMPT_PROOF, true),
        ("Dprime", crate::fixtures::S_DPRIME_PROOF, false),
        ("E", crate::fixtures::S_OPPONENT_PROOF, true),
    ] {
        let proof = HsProof::from_json_str(json)?;
        let design = proof_to_design(&proof, root, permissive)?;
        out.push(FixturePair {
            name: name.to_string(),
            proof,
            design,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{validate_with, LazyPolicy};

    fn atom(name: &str) -> HsFormula {
        HsFormula::atom(name)
    }

    fn parse(text: &str) -> (HsFormula, Polarity) {
        parse_formula(text).unwrap_or_else(|e| panic!("{text}: {e}"))
    }

    // -- parsing and normal form ------------------------------------------------

    #[test]
    fn shifts_and_duals_normalize() {
        assert_eq!(parse("P"), (atom("P"), Polarity::Pos));
        assert_eq!(parse("~P"), (atom("P"), Polarity::Neg));
        assert_eq!(parse("1"), (HsFormula::One, Polarity::Pos));
        assert_eq!(parse("T"), (HsFormula::Top, Polarity::Neg));
        assert_eq!(parse("~T"), (HsFormula::Top, Polarity::Pos));
        assert_eq!(
            parse("down ~P"),
            (HsFormula::shift(atom("P")), Polarity::Pos)
        );
        assert_eq!(parse("up P"), (HsFormula::shift(atom("P")), Polarity::Neg));
        // The shift of a shift nests.
        let (q, pol) = parse("down (up P)");
        assert_eq!(pol, Polarity::Pos);
        assert_eq!(q, HsFormula::shift(HsFormula::shift(atom("P"))));
    }

    #[test]
    fn tensors_are_one_clause_sums() {
        let (q, pol) = parse("(up a) * (up b)");
        assert_eq!(pol, Polarity::Pos);
        assert_eq!(
            q,
            HsFormula::Plus(vec![Tensor(vec![
                HsFormula::shift(atom("a")),
                HsFormula::shift(atom("b")),
            ])])
        );
        // Chains flatten rather than nest.
        let (q3, _) = parse("~a * ~b * ~c");
        assert_eq!(q3.disjuncts().unwrap()[0].0.len(), 3);
    }

    #[test]
    fn sums_flatten_and_autoshift() {
        // Negative summands become single-slot clauses.
        let (q, pol) = parse("~a + ~b");
        assert_eq!(pol, Polarity::Pos);
        assert_eq!(
            q,
            HsFormula::Plus(vec![Tensor(vec![atom("a")]), Tensor(vec![atom("b")])])
        );
        // Bare positive summands are read through an up-shift.
        let (q, _) = parse("a + b");
        assert_eq!(
            q,
            HsFormula::Plus(vec![
                Tensor(vec![HsFormula::shift(atom("a"))]),
                Tensor(vec![HsFormula::shift(atom("b"))]),
            ])
        );
        // Nested sums flatten.
        let (q, _) = parse("~a + (~b + ~c)");
        assert_eq!(q.disjuncts().unwrap().len(), 3);
    }

    #[test]
    fn arrows_translate_to_two_slot_clauses() {
        let (q, pol) = parse("(up L) -o P");
        assert_eq!(pol, Polarity::Neg);
        assert_eq!(
            q,
            HsFormula::Plus(vec![Tensor(vec![HsFormula::shift(atom("L")), atom("P")])])
        );
    }

    #[test]
    fn polarity_clashes_are_rejected() {
        assert!(matches!(
            parse_formula("down P"),
            Err(HsError::Polarity { .. })
        ));
        assert!(matches!(
            parse_formula("up ~P"),
            Err(HsError::Polarity { .. })
        ));
        assert!(matches!(
            parse_formula("a * ~b"),
            Err(HsError::Polarity { .. })
        ));
        assert!(matches!(
            parse_formula("P -o Q"),
            Err(HsError::Polarity { .. })
        ));
        assert!(matches!(
            parse_formula("(up P) -o ~Q"),
            Err(HsError::Polarity { .. })
        ));
    }

    #[test]
    fn quantifiers_ground_over_their_domain() {
        let mut domains = FiniteDomains::new();
        domains.insert("Lang", vec!["e'".into(), "e".into(), "e''".into()]);
        let (q, pol) = expand_quantifiers("some y:Lang. a(y)", &domains).unwrap();
        assert_eq!(pol, Polarity::Pos);
        let clauses = q.disjuncts().unwrap();
        assert_eq!(clauses.len(), 3);
        assert_eq!(
            clauses[1].0[0],
            HsFormula::shift(HsFormula::Atom {
                name: "a".into(),
                args: vec!["e".into()]
            })
        );

        domains.insert("Ind", vec!["d".into(), "d'".into()]);
        let (q, pol) = expand_quantifiers("all x:Ind. (up L(x))", &domains).unwrap();
        assert_eq!(pol, Polarity::Neg);
        assert_eq!(
            q,
            HsFormula::Plus(vec![
                Tensor(vec![HsFormula::Atom {
                    name: "L".into(),
                    args: vec!["d".into()]
                }]),
                Tensor(vec![HsFormula::Atom {
                    name: "L".into(),
                    args: vec!["d'".into()]
                }]),
            ])
        );

        assert!(matches!(
            expand_quantifiers("some z:Nowhere. a(z)", &domains),
            Err(HsError::UnboundVariable { .. })
        ));
    }

    #[test]
    fn rendering_round_trips() {
        let texts = [
            "P",
            "~P",
            "1",
            "T",
            "~T",
            "down ~P",
            "up P",
            "down (up P)",
            "(up a) * (up b)",
            "~a + ~b",
            "a + b",
            "~a * ~b + ~c",
            "(up a) * (up ((up b) * (up c)))",
        ];
        for text in texts {
            let (q, pol) = parse(text);
            let rendered = render_formula(&q, pol);
            let (q2, pol2) = parse(&rendered);
            assert_eq!((q2, pol2), (q, pol), "render `{text}` -> `{rendered}`");
        }
    }

    // -- proofs -------------------------------------------------------------------

    /// The eta-expanded identity on one atom:
    /// ~((up P) * ~P) decomposes, shifts, and closes with the atom axiom.
    const ETA_PROOF: &str = r#"{
        "conclusion": {"left": ["(up P) * ~P"]},
        "rule": "negative",
        "premises": [
            {"conclusion": {"right": ["down ~P", "P"]},
             "rule": "shift-pos", "focus": 0,
             "premises": [
                 {"conclusion": {"left": ["~P"], "right": ["P"]},
                  "rule": "atom-axiom"}
             ]}
        ]
    }"#;

    #[test]
    fn the_eta_identity_checks() {
        let proof = HsProof::from_json_str(ETA_PROOF).unwrap();
        let report = check_proof(&proof);
        assert!(report.valid, "{report}");
        assert!(report.open.is_empty());
        assert!(!report.uses_daimon);
    }

    #[test]
    fn proof_json_round_trips() {
        let proof = HsProof::from_json_str(ETA_PROOF).unwrap();
        let text = proof.to_json_string();
        let back = HsProof::from_json_str(&text).unwrap();
        assert_eq!(back, proof);
    }

    #[test]
    fn the_eta_identity_compiles_to_a_fax() {
        let proof = HsProof::from_json_str(ETA_PROOF).unwrap();
        let design = proof_to_design(&proof, &"0".parse().unwrap(), false).unwrap();
        assert_eq!(design.base, Fork::negative("0".parse().unwrap(), []));
        assert!(validate_with(&design, LazyPolicy::Allow).ok());
        // Shape: one branch {0,1}; inside, the shift focuses 0.0 and routes
        // the atom occurrence at 0.1 to a fax between 0.0.0 and 0.1.
        let RuleNode::Neg { branches, .. } = &design.root else {
            panic!("expected negative root")
        };
        let branch = &branches[&Ram::from_iter([0, 1])];
        let RuleNode::Pos {
            focus,
            premises,
            ctx,
            ..
        } = &branch.tree
        else {
            panic!("expected shift")
        };
        assert_eq!(focus.to_string(), "0.0");
        assert_eq!(ctx[&0].iter().next().unwrap().to_string(), "0.1");
        let RuleNode::Lazy(LazyGen::Fax { left, right, .. }) = &premises[&0] else {
            panic!("expected fax")
        };
        assert_eq!(left.to_string(), "0.0.0");
        assert_eq!(right.to_string(), "0.1");
    }

    #[test]
    fn axioms_are_checked_strictly() {
        // Atom axiom with mismatched arguments.
        let bad = r#"{"conclusion": {"left": ["~P(x)"], "right": ["P(y)"]},
                      "rule": "atom-axiom"}"#;
        let report = check_proof(&HsProof::from_json_str(bad).unwrap());
        assert!(!report.valid);
        assert_eq!(report.violations[0].code, "BAD_AXIOM");

        let one = r#"{"conclusion": {"right": ["1"]}, "rule": "one-axiom"}"#;
        assert!(check_proof(&HsProof::from_json_str(one).unwrap()).valid);

        let top = r#"{"conclusion": {"right": ["down T", "P"]}, "rule": "top-axiom"}"#;
        assert!(check_proof(&HsProof::from_json_str(top).unwrap()).valid);

        let data = r#"{"conclusion": {"right": ["speaks(d,e)"]}, "rule": "data-axiom"}"#;
        assert!(check_proof(&HsProof::from_json_str(data).unwrap()).valid);

        let daimon = r#"{"conclusion": {"right": ["1", "1"]}, "rule": "daimon"}"#;
        let report = check_proof(&HsProof::from_json_str(daimon).unwrap());
        assert!(report.valid);
        assert!(report.uses_daimon);
    }

    #[test]
    fn routing_violations_are_caught() {
        // Both premises claim the same context formula.
        let overlap = r#"{
            "conclusion": {"right": ["(up a) * (up b)", "down ~c"]},
            "rule": "positive", "focus": 0, "disjunct": 0, "routing": [[0], [0]],
            "premises": [
                {"conclusion": {"left": ["up a"], "right": ["down ~c"]}, "rule": "open", "label": "A"},
                {"conclusion": {"left": ["up b"], "right": ["down ~c"]}, "rule": "open", "label": "B"}
            ]
        }"#;
        let report = check_proof(&HsProof::from_json_str(overlap).unwrap());
        assert!(!report.valid);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == "ROUTING_OVERLAP"));

        let out_of_range = r#"{
            "conclusion": {"right": ["(up a) * (up b)"]},
            "rule": "positive", "focus": 0, "disjunct": 0, "routing": [[3], []],
            "premises": [
                {"conclusion": {"left": ["up a"]}, "rule": "open", "label": "A"},
                {"conclusion": {"left": ["up b"]}, "rule": "open", "label": "B"}
            ]
        }"#;
        let report = check_proof(&HsProof::from_json_str(out_of_range).unwrap());
        assert!(report.violations.iter().any(|v| v.code == "ROUTING_RANGE"));

        let bad_focus = r#"{"conclusion": {"right": ["down ~P"]},
                            "rule": "positive", "focus": 3,
                            "premises": []}"#;
        let report = check_proof(&HsProof::from_json_str(bad_focus).unwrap());
        assert!(report.violations.iter().any(|v| v.code == "FOCUS_RANGE"));
    }

    #[test]
    fn premise_sequent_mismatches_are_caught() {
        // The premise states the wrong atom.
        let wrong = r#"{
            "conclusion": {"right": ["down ~P"]},
            "rule": "shift-pos", "focus": 0,
            "premises": [
                {"conclusion": {"left": ["~Q"]}, "rule": "open", "label": "q"}
            ]
        }"#;
        let report = check_proof(&HsProof::from_json_str(wrong).unwrap());
        assert!(!report.valid);
        assert!(report
            .violations
            .iter()
            .any(|v| v.code == "PREMISE_SEQUENT"));

        let miscounted = r#"{
            "conclusion": {"left": ["~a + ~b"]},
            "rule": "negative",
            "premises": [
                {"conclusion": {"right": ["a"]}, "rule": "data-axiom"}
            ]
        }"#;
        let report = check_proof(&HsProof::from_json_str(miscounted).unwrap());
        assert!(report.violations.iter().any(|v| v.code == "PREMISE_COUNT"));
    }

    // -- compilation --------------------------------------------------------------

    const TENSOR_PROOF: &str = r#"{
        "conclusion": {"right": ["(up a) * (up b)"]},
        "rule": "positive", "focus": 0, "disjunct": 0, "routing": [[], []],
        "premises": [
            {"conclusion": {"left": ["up a"]}, "rule": "open", "label": "A"},
            {"conclusion": {"left": ["up b"]}, "rule": "open", "label": "B"}
        ]
    }"#;

    #[test]
    fn open_leaves_gate_compilation() {
        let proof = HsProof::from_json_str(TENSOR_PROOF).unwrap();
        let err = proof_to_design(&proof, &"0".parse().unwrap(), false).unwrap_err();
        assert!(matches!(err, HsError::OpenLeaves { .. }));

        let design = proof_to_design(&proof, &"0".parse().unwrap(), true).unwrap();
        let RuleNode::Pos { ram, premises, .. } = &design.root else {
            panic!("expected positive root")
        };
        assert_eq!(ram, &Ram::from_iter([0, 1]));
        // Negative open leaves become the stuck design.
        for premise in premises.values() {
            assert!(matches!(premise,
                RuleNode::Neg { branches, .. } if branches.is_empty()));
        }
        assert!(validate_with(&design, LazyPolicy::Allow).ok());
    }

    #[test]
    fn positive_open_leaves_become_the_daimon() {
        let proof_text = r#"{
            "conclusion": {"left": ["down ~P"]},
            "rule": "shift-neg",
            "premises": [
                {"conclusion": {"right": ["P"]}, "rule": "open", "label": "later"}
            ]
        }"#;
        let proof = HsProof::from_json_str(proof_text).unwrap();
        let design = proof_to_design(&proof, &"0".parse().unwrap(), true).unwrap();
        let RuleNode::Neg { branches, .. } = &design.root else {
            panic!("expected negative root")
        };
        assert_eq!(branches[&Ram::from_iter([0])].tree, RuleNode::Daimon);
    }

    #[test]
    fn disjunct_offsets_address_the_clauses() {
        // Three clauses of arities 1, 2, 1: codes {0}, {1,2}, {3}.
        let (q, _) = parse("~a + ~b * ~c + ~d");
        let codes = clause_codes(q.disjuncts().unwrap());
        assert_eq!(codes, vec![vec![0], vec![1, 2], vec![3]]);

        let proof_text = r#"{
            "conclusion": {"right": ["~a + ~b * ~c + ~d"]},
            "rule": "positive", "focus": 0, "disjunct": 1, "routing": [[], []],
            "premises": [
                {"conclusion": {"left": ["~b"]}, "rule": "open", "label": "B"},
                {"conclusion": {"left": ["~c"]}, "rule": "open", "label": "C"}
            ]
        }"#;
        let proof = HsProof::from_json_str(proof_text).unwrap();
        let design = proof_to_design(&proof, &"0".parse().unwrap(), true).unwrap();
        let RuleNode::Pos { ram, .. } = &design.root else {
            panic!("expected positive root")
        };
        assert_eq!(ram, &Ram::from_iter([1, 2]));
    }

    #[test]
    fn compiled_proof_depth_matches_design_depth() {
        // For proofs built without atom/top axioms and opens, rule layers
        // and design layers correspond one to one.
        let proof_text = r#"{
            "conclusion": {"left": ["down ~P"]},
            "rule": "shift-neg",
            "premises": [
                {"conclusion": {"right": ["P"]}, "rule": "data-axiom"}
            ]
        }"#;
        let proof = HsProof::from_json_str(proof_text).unwrap();
        let design = proof_to_design(&proof, &"0".parse().unwrap(), false).unwrap();
        assert_eq!(proof.depth(), design.root.depth());
    }

    #[test]
    fn multi_formula_roots_are_rejected() {
        let proof = HsProof::from_json_str(
            r#"{"conclusion": {"left": ["~P"], "right": ["P"]}, "rule": "atom-axiom"}"#,
        )
        .unwrap();
        let err = proof_to_design(&proof, &"0".parse().unwrap(), false).unwrap_err();
        assert!(matches!(err, HsError::MultiFormulaConclusion { n: 2 }));
    }

    #[test]
    fn invalid_proofs_do_not_compile() {
        let bad = r#"{"conclusion": {"left": ["~P(x)"], "right": ["P(y)"]},
                      "rule": "atom-axiom"}"#;
        let proof = HsProof::from_json_str(bad).unwrap();
        let err = proof_to_design(&proof, &"0".parse().unwrap(), true).unwrap_err();
        assert!(matches!(err, HsError::InvalidProof { .. }));
    }
}
