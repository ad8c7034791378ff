//! Finite-scale behaviours: universes of designs, orthogonality sets, and
//! biorthogonal closure.
//!
//! Full behaviours are biorthogonally closed sets of designs over an
//! infinite universe; everything here is their finite-scale approximation.
//! A [`Universe`] enumerates every well-formed design on a base up to a
//! depth, with ramifications drawn from a fixed bound. Orthogonality within
//! a universe is decided by running closed nets under a step budget; a run
//! that exhausts its budget aborts the whole query (`BUDGET_INSUFFICIENT`)
//! rather than guessing.
//!
//! [`orth_set`] computes `S⊥` against a universe, [`biorth`] computes `S⊥⊥`
//! and reports whether `S` was already closed, [`precedes`] compares designs
//! by inclusion of their orthogonality sets, and [`behaviour_oplus`] builds
//! the internal-completeness sum of two component sets.
//!
//! [`OrthTable`] materializes the full orthogonality matrix between two
//! design lists so that repeated set computations become bit scans. With the
//! `parallel` feature (on by default) the table is filled by rayon; the
//! sequential fill is always available and produces the identical table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::core::{subsets, Branch, Design, Fork, Locus, Ram, RuleNode};
use crate::normalize::{orthogonal, NetError, TriState};

/// Default ceiling on the number of designs a universe may hold.
pub const DEFAULT_SIZE_CAP: usize = 100_000;

/// Errors raised by behaviour-level computations.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum BehaviourError {
    /// Enumeration would exceed the size cap.
    #[error("SIZE_LIMIT: universe exceeds the cap of {cap} designs")]
    SizeLimit { cap: usize },
    /// An orthogonality run used up its budget, so the set query is
    /// undecided. Carries the offending pair.
    #[error("BUDGET_INSUFFICIENT: a run was cut off after {steps} steps")]
    BudgetInsufficient {
        steps: usize,
        pair: Box<(Design, Design)>,
    },
    /// The two sides of a sum share a first ramification index.
    #[error("RAMIFICATION_CLASH: both components start with index {i}")]
    RamificationClash { i: u32 },
    /// Designs handed to an operation live on incompatible bases.
    #[error("BASE_MISMATCH: {detail}")]
    BaseMismatch { detail: String },
    /// A component set that must be nonempty was empty.
    #[error("EMPTY_COMPONENT: the {which} component has no designs")]
    EmptyComponent { which: &'static str },
    /// A net-level failure while testing a pair.
    #[error(transparent)]
    Net(#[from] NetError),
}

// ---------------------------------------------------------------------------
// Universes
// ---------------------------------------------------------------------------

/// A finite universe: every design on `base` up to `max_depth` action
/// layers, ramifications drawn from subsets of `ram_bound`. Designs are
/// stored sorted and deduplicated, so indices are stable and reproducible.
#[derive(Debug, Clone)]
pub struct Universe {
    pub base: Fork,
    pub max_depth: usize,
    pub ram_bound: Ram,
    pub designs: Vec<Design>,
}

impl Universe {
    /// Wraps an explicit design list (a curated universe) in the same
    /// interface the enumerated ones use.
    pub fn custom(base: Fork, ram_bound: Ram, designs: Vec<Design>) -> Universe {
        let set: BTreeSet<Design> = designs.into_iter().collect();
        let designs: Vec<Design> = set.into_iter().collect();
        let max_depth = designs.iter().map(|d| d.root.depth()).max().unwrap_or(0);
        Universe {
            base,
            max_depth,
            ram_bound,
            designs,
        }
    }

    pub fn len(&self) -> usize {
        self.designs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.is_empty()
    }
}

/// Enumerates the universe of designs on `base` up to `max_depth` action
/// layers, under the default size cap.
///
/// Depth counts proper action layers: at depth 0 a positive fork holds only
/// the daimon design and a negative fork only the stuck design with no
/// branches.
///
/// # Examples
///
/// ```
/// use ludics_core::behaviour::enumerate_universe;
/// use ludics_core::core::{Fork, Ram};
///
/// let base = Fork::positive(["0".parse().unwrap()]);
/// let u = enumerate_universe(&base, 1, &Ram::from_iter([0, 1])).unwrap();
/// assert_eq!(u.len(), 5); // † plus one design per ramification subset
/// ```
pub fn enumerate_universe(
    base: &Fork,
    max_depth: usize,
    ram_bound: &Ram,
) -> Result<Universe, BehaviourError> {
    enumerate_universe_capped(base, max_depth, ram_bound, DEFAULT_SIZE_CAP)
}

/// [`enumerate_universe`] with an explicit size cap.
pub fn enumerate_universe_capped(
    base: &Fork,
    max_depth: usize,
    ram_bound: &Ram,
    cap: usize,
) -> Result<Universe, BehaviourError> {
    let roots = match base.polarity() {
        crate::core::Polarity::Pos => enum_pos(base, max_depth, ram_bound, cap)?,
        crate::core::Polarity::Neg => {
            let anchor = base.neg.clone().expect("negative fork");
            enum_neg(&anchor, &base.pos, max_depth, ram_bound, cap)?
        }
    };
    let set: BTreeSet<Design> = roots
        .into_iter()
        .map(|root| Design {
            base: base.clone(),
            root,
        })
        .collect();
    Ok(Universe {
        base: base.clone(),
        max_depth,
        ram_bound: ram_bound.clone(),
        designs: set.into_iter().collect(),
    })
}

fn capped<T>(out: &[T], cap: usize) -> Result<(), BehaviourError> {
    if out.len() > cap {
        Err(BehaviourError::SizeLimit { cap })
    } else {
        Ok(())
    }
}

/// All subsets of a locus set, smallest first.
fn locus_subsets(set: &BTreeSet<Locus>) -> Vec<BTreeSet<Locus>> {
    let elems: Vec<&Locus> = set.iter().collect();
    let mut out = Vec::with_capacity(1 << elems.len());
    for mask in 0u64..(1u64 << elems.len()) {
        let mut sub = BTreeSet::new();
        for (k, l) in elems.iter().enumerate() {
            if mask & (1 << k) != 0 {
                sub.insert((*l).clone());
            }
        }
        out.push(sub);
    }
    out
}

fn enum_pos(
    fork: &Fork,
    depth: usize,
    bound: &Ram,
    cap: usize,
) -> Result<Vec<RuleNode>, BehaviourError> {
    let mut out = vec![RuleNode::Daimon];
    if depth == 0 {
        return Ok(out);
    }
    for focus in &fork.pos {
        let others: Vec<&Locus> = fork.pos.iter().filter(|l| *l != focus).collect();
        for ram in subsets(bound) {
            let targets: Vec<Option<u32>> =
                std::iter::once(None).chain(ram.iter().map(Some)).collect();
            // Every way of dropping or routing each remaining context locus
            // to one of the premises.
            let mut assignment = vec![0u32; others.len()];
            loop {
                let mut ctx: BTreeMap<u32, BTreeSet<Locus>> =
                    ram.iter().map(|i| (i, BTreeSet::new())).collect();
                for (k, other) in others.iter().enumerate() {
                    if let Some(i) = targets[assignment[k] as usize] {
                        ctx.get_mut(&i)
                            .expect("target in ram")
                            .insert((*other).clone());
                    }
                }
                // One premise universe per created address.
                let mut premise_options: Vec<(u32, Vec<RuleNode>)> = Vec::new();
                for i in ram.iter() {
                    let sub = enum_neg(&focus.child(i), &ctx[&i], depth - 1, bound, cap)?;
                    premise_options.push((i, sub));
                }
                let mut choice = vec![0usize; premise_options.len()];
                loop {
                    let premises: BTreeMap<u32, RuleNode> = premise_options
                        .iter()
                        .zip(&choice)
                        .map(|((i, opts), &c)| (*i, opts[c].clone()))
                        .collect();
                    out.push(RuleNode::Pos {
                        focus: focus.clone(),
                        ram: ram.clone(),
                        premises,
                        ctx: ctx.clone(),
                    });
                    capped(&out, cap)?;
                    if !bump(
                        &mut choice,
                        &premise_options
                            .iter()
                            .map(|(_, o)| o.len())
                            .collect::<Vec<_>>(),
                    ) {
                        break;
                    }
                }
                if !bump_u32(&mut assignment, targets.len() as u32) {
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn enum_neg(
    anchor: &Locus,
    ctx: &BTreeSet<Locus>,
    depth: usize,
    bound: &Ram,
    cap: usize,
) -> Result<Vec<RuleNode>, BehaviourError> {
    if depth == 0 {
        return Ok(vec![RuleNode::Neg {
            anchor: anchor.clone(),
            branches: BTreeMap::new(),
        }]);
    }
    // Per ramification J: either no branch at all, or a branch for each
    // choice of carried context Λ_J and each continuation design.
    let mut per_j: Vec<(Ram, Vec<Option<Branch>>)> = Vec::new();
    for j in subsets(bound) {
        let mut options: Vec<Option<Branch>> = vec![None];
        for lam in locus_subsets(ctx) {
            let mut pos: BTreeSet<Locus> = j.iter().map(|i| anchor.child(i)).collect();
            pos.extend(lam.iter().cloned());
            let sub = enum_pos(&Fork::positive(pos), depth - 1, bound, cap)?;
            for tree in sub {
                options.push(Some(Branch {
                    tree,
                    ctx: lam.clone(),
                }));
            }
        }
        per_j.push((j, options));
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_j.len()];
    loop {
        let mut branches = BTreeMap::new();
        for ((j, options), &c) in per_j.iter().zip(&choice) {
            if let Some(branch) = &options[c] {
                branches.insert(j.clone(), branch.clone());
            }
        }
        out.push(RuleNode::Neg {
            anchor: anchor.clone(),
            branches,
        });
        capped(&out, cap)?;
        if !bump(
            &mut choice,
            &per_j.iter().map(|(_, o)| o.len()).collect::<Vec<_>>(),
        ) {
            break;
        }
    }
    Ok(out)
}

/// Advances a mixed-radix counter; false once it wraps to all zeros.
fn bump(digits: &mut [usize], radixes: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radixes) {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

fn bump_u32(digits: &mut [u32], radix: u32) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

// ---------------------------------------------------------------------------
// Orthogonality sets and closure
// ---------------------------------------------------------------------------

fn check_pair(d: &Design, e: &Design, budget: usize) -> Result<bool, BehaviourError> {
    match orthogonal(d, e, budget)? {
        TriState::Yes => Ok(true),
        TriState::No => Ok(false),
        TriState::Unknown(steps) => Err(BehaviourError::BudgetInsufficient {
            steps,
            pair: Box::new((d.clone(), e.clone())),
        }),
    }
}

/// The orthogonality set `S⊥` of a design set, cut down to a universe: every
/// universe member that converges against all of `S`.
///
/// An empty `S` returns the whole universe.
pub fn orth_set(
    set: &[Design],
    universe: &Universe,
    budget: usize,
) -> Result<Vec<Design>, BehaviourError> {
    let mut out = Vec::new();
    'members: for e in &universe.designs {
        for d in set {
            if !check_pair(d, e, budget)? {
                continue 'members;
            }
        }
        out.push(e.clone());
    }
    Ok(out)
}

/// A finite-scale behaviour: the members of `S⊥⊥` within a self universe,
/// plus whether `S` was already biorthogonally closed there.
#[derive(Debug, Clone)]
pub struct BehaviourSet {
    pub base: Fork,
    pub members: Vec<Design>,
    pub closed: bool,
}

fn set_eq(a: &[Design], b: &[Design]) -> bool {
    let sa: BTreeSet<&Design> = a.iter().collect();
    let sb: BTreeSet<&Design> = b.iter().collect();
    sa == sb
}

/// The biorthogonal `S⊥⊥` of a design set at finite scale: `S⊥` is taken in
/// `counter`, the second orthogonal in `this`. The result is `closed` iff
/// `S` is a subset of `this` and equals its own biorthogonal.
pub fn biorth(
    set: &[Design],
    counter: &Universe,
    this: &Universe,
    budget: usize,
) -> Result<BehaviourSet, BehaviourError> {
    let pole = orth_set(set, counter, budget)?;
    let members = orth_set(&pole, this, budget)?;
    let in_universe = set.iter().all(|d| this.designs.binary_search(d).is_ok());
    let closed = in_universe && set_eq(&members, set);
    Ok(BehaviourSet {
        base: this.base.clone(),
        members,
        closed,
    })
}

/// The refinement preorder at finite scale: `d` precedes `e` iff everything
/// orthogonal to `d` (within the universe) is orthogonal to `e`.
pub fn precedes(
    d: &Design,
    e: &Design,
    universe: &Universe,
    budget: usize,
) -> Result<bool, BehaviourError> {
    for t in &universe.designs {
        if check_pair(d, t, budget)? && !check_pair(e, t, budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The sum of two component sets, by internal completeness: components are
/// negative designs on `σ⋆i ⊢` and `σ⋆j ⊢` with `i ≠ j`; the sum collects
/// `(+,σ,{i})·c` for `c` in the first set, `(+,σ,{j})·d` for `d` in the
/// second, and the daimon design on `⊢ σ`.
///
/// The `closed` flag reports whether that member set is biorthogonally
/// closed in the given universes — no closure is taken silently.
pub fn behaviour_oplus(
    first: &[Design],
    second: &[Design],
    counter: &Universe,
    this: &Universe,
    budget: usize,
) -> Result<BehaviourSet, BehaviourError> {
    let (sigma_a, i) = component_address(first, "first")?;
    let (sigma_b, j) = component_address(second, "second")?;
    if sigma_a != sigma_b {
        return Err(BehaviourError::BaseMismatch {
            detail: format!(
                "components live under different addresses `{sigma_a}` and `{sigma_b}`"
            ),
        });
    }
    if i == j {
        return Err(BehaviourError::RamificationClash { i });
    }
    let base = Fork::positive([sigma_a.clone()]);
    let mut members: BTreeSet<Design> = BTreeSet::new();
    for (index, set) in [(i, first), (j, second)] {
        for c in set {
            members.insert(Design {
                base: base.clone(),
                root: RuleNode::Pos {
                    focus: sigma_a.clone(),
                    ram: Ram::from_iter([index]),
                    premises: BTreeMap::from([(index, c.root.clone())]),
                    ctx: BTreeMap::from([(index, BTreeSet::new())]),
                },
            });
        }
    }
    members.insert(Design::daimon_on(base.clone()));
    let members: Vec<Design> = members.into_iter().collect();
    let closure = biorth(&members, counter, this, budget)?;
    let closed = set_eq(&closure.members, &members);
    Ok(BehaviourSet {
        base,
        members,
        closed,
    })
}

/// The shared base address `σ⋆i` of a component set, split into σ and i.
fn component_address(set: &[Design], which: &'static str) -> Result<(Locus, u32), BehaviourError> {
    if set.is_empty() {
        return Err(BehaviourError::EmptyComponent { which });
    }
    let mut address: Option<Locus> = None;
    for d in set {
        let neg = d
            .base
            .neg
            .as_ref()
            .ok_or_else(|| BehaviourError::BaseMismatch {
                detail: format!("the {which} component contains a non-negative design"),
            })?;
        if !d.base.pos.is_empty() {
            return Err(BehaviourError::BaseMismatch {
                detail: format!("the {which} component carries residual loci"),
            });
        }
        match &address {
            None => address = Some(neg.clone()),
            Some(a) if a == neg => {}
            Some(a) => {
                return Err(BehaviourError::BaseMismatch {
                    detail: format!("the {which} component mixes bases `{a}` and `{neg}`"),
                })
            }
        }
    }
    let address = address.expect("nonempty set");
    let segments = address.segments();
    let Some((&last, parent)) = segments.split_last() else {
        return Err(BehaviourError::BaseMismatch {
            detail: format!("the {which} component sits at the root address"),
        });
    };
    Ok((Locus::from_segments(parent.to_vec()), last))
}

// ---------------------------------------------------------------------------
// Orthogonality tables
// ---------------------------------------------------------------------------

/// The full orthogonality matrix between a row list and a column list of
/// designs. Entry `(r, c)` is true iff `rows[r] ⊥ cols[c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthTable {
    n_rows: usize,
    n_cols: usize,
    bits: Vec<bool>,
}

impl OrthTable {
    /// Fills the table, in parallel when the `parallel` feature is enabled.
    /// Both fills produce the identical table.
    pub fn build(
        rows: &[Design],
        cols: &[Design],
        budget: usize,
    ) -> Result<OrthTable, BehaviourError> {
        #[cfg(feature = "parallel")]
        {
            OrthTable::build_parallel(rows, cols, budget)
        }
        #[cfg(not(feature = "parallel"))]
        {
            OrthTable::build_sequential(rows, cols, budget)
        }
    }

    /// Fills the table one pair at a time.
    pub fn build_sequential(
        rows: &[Design],
        cols: &[Design],
        budget: usize,
    ) -> Result<OrthTable, BehaviourError> {
        let mut bits = Vec::with_capacity(rows.len() * cols.len());
        for r in rows {
            for c in cols {
                bits.push(check_pair(r, c, budget)?);
            }
        }
        Ok(OrthTable {
            n_rows: rows.len(),
            n_cols: cols.len(),
            bits,
        })
    }

    /// Fills the table with one rayon task per pair. Entries land at fixed
    /// indices, so the result is deterministic.
    #[cfg(feature = "parallel")]
    pub fn build_parallel(
        rows: &[Design],
        cols: &[Design],
        budget: usize,
    ) -> Result<OrthTable, BehaviourError> {
        let n_cols = cols.len();
        let bits = (0..rows.len() * n_cols)
            .into_par_iter()
            .map(|k| check_pair(&rows[k / n_cols], &cols[k % n_cols], budget))
            .collect::<Result<Vec<bool>, BehaviourError>>()?;
        Ok(OrthTable {
            n_rows: rows.len(),
            n_cols,
            bits,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.n_cols + c]
    }

    /// One row of the table as a slice.
    pub fn row(&self, r: usize) -> &[bool] {
        &self.bits[r * self.n_cols..(r + 1) * self.n_cols]
    }

    /// Columns orthogonal to every listed row (the table-level `S⊥`).
    pub fn orth_of_rows(&self, rows: &[usize]) -> Vec<usize> {
        (0..self.n_cols)
            .filter(|&c| rows.iter().all(|&r| self.get(r, c)))
            .collect()
    }

    /// Rows orthogonal to every listed column.
    pub fn orth_of_cols(&self, cols: &[usize]) -> Vec<usize> {
        (0..self.n_rows)
            .filter(|&r| cols.iter().all(|&c| self.get(r, c)))
            .collect()
    }

    /// The table-level `S⊥⊥` of a row set.
    pub fn biorth_of_rows(&self, rows: &[usize]) -> Vec<usize> {
        self.orth_of_cols(&self.orth_of_rows(rows))
    }

    /// True iff the row set equals its own table-level biorthogonal.
    pub fn closed_rows(&self, rows: &[usize]) -> bool {
        let mut sorted: Vec<usize> = rows.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        self.biorth_of_rows(rows) == sorted
    }

    /// The table as a Y/N grid, one comma-separated line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                if c > 0 {
                    out.push(',');
                }
                out.push(if self.get(r, c) { 'Y' } else { 'N' });
            }
            let _ = writeln!(out);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
