//! Finite Boolean algebras represented by their atoms.
//!
//! Every finite Boolean algebra is the power set of its atoms, so an element
//! is a bitset over atom indices. Meet is intersection, join is union and the
//! ring addition is symmetric difference. Elements remember the algebra they
//! belong to; mixing elements of different algebras is an error rather than a
//! silent reinterpretation of atom indices.

use fixedbitset::FixedBitSet;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use thiserror::Error;

/// Default cap on the number of atoms a coproduct may produce.
pub const DEFAULT_ATOM_CAP: usize = 1 << 20;

static NEXT_ALGEBRA_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoolError {
    #[error("elements belong to different algebras")]
    AlgebraMismatch,
    #[error("coproduct would have {atoms} atoms, above the cap of {cap}")]
    SizeOverflow { atoms: usize, cap: usize },
    #[error("atom index {index} out of range for an algebra with {atom_count} atoms")]
    AtomOutOfRange { index: usize, atom_count: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("not an ideal: {0}")]
    NotAnIdeal(String),
    #[error("not a homomorphism: {0}")]
    NotAHomomorphism(String),
}

/// The power set algebra `2^{0..atom_count}` together with named generators.
pub struct FiniteBoolAlgebra {
    id: u64,
    atom_count: usize,
    generators: Vec<(String, FixedBitSet)>,
}

impl fmt::Debug for FiniteBoolAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteBoolAlgebra")
            .field("id", &self.id)
            .field("atom_count", &self.atom_count)
            .field(
                "generators",
                &self.generators.iter().map(|(l, _)| l).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl FiniteBoolAlgebra {
    /// An algebra whose generators are its atoms, labelled `"0"`, `"1"`, ...
    pub fn new(atom_count: usize) -> Arc<Self> {
        let generators = (0..atom_count)
            .map(|i| {
                let mut bits = FixedBitSet::with_capacity(atom_count);
                bits.insert(i);
                (i.to_string(), bits)
            })
            .collect();
        Arc::new(FiniteBoolAlgebra {
            id: NEXT_ALGEBRA_ID.fetch_add(1, Ordering::Relaxed),
            atom_count,
            generators,
        })
    }

    /// An algebra with explicitly chosen generators, each given as a set of atoms.
    pub fn with_generators<S: Into<String>>(
        atom_count: usize,
        generators: Vec<(S, Vec<usize>)>,
    ) -> Result<Arc<Self>, BoolError> {
        let mut gens = Vec::with_capacity(generators.len());
        for (label, atoms) in generators {
            let mut bits = FixedBitSet::with_capacity(atom_count);
            for a in atoms {
                if a >= atom_count {
                    return Err(BoolError::AtomOutOfRange {
                        index: a,
                        atom_count,
                    });
                }
                bits.insert(a);
            }
            gens.push((label.into(), bits));
        }
        Ok(Arc::new(FiniteBoolAlgebra {
            id: NEXT_ALGEBRA_ID.fetch_add(1, Ordering::Relaxed),
            atom_count,
            generators: gens,
        }))
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn generator_labels(&self) -> impl Iterator<Item = &str> {
        self.generators.iter().map(|(l, _)| l.as_str())
    }

    fn elem(self: &Arc<Self>, atoms: FixedBitSet) -> BoolElem {
        BoolElem {
            algebra: Arc::clone(self),
            atoms,
        }
    }

    pub fn zero(self: &Arc<Self>) -> BoolElem {
        self.elem(FixedBitSet::with_capacity(self.atom_count))
    }

    pub fn one(self: &Arc<Self>) -> BoolElem {
        let mut bits = FixedBitSet::with_capacity(self.atom_count);
        bits.insert_range(..);
        self.elem(bits)
    }

    pub fn atom(self: &Arc<Self>, index: usize) -> Result<BoolElem, BoolError> {
        self.element([index])
    }

    pub fn element(
        self: &Arc<Self>,
        atoms: impl IntoIterator<Item = usize>,
    ) -> Result<BoolElem, BoolError> {
        let mut bits = FixedBitSet::with_capacity(self.atom_count);
        for a in atoms {
            if a >= self.atom_count {
                return Err(BoolError::AtomOutOfRange {
                    index: a,
                    atom_count: self.atom_count,
                });
            }
            bits.insert(a);
        }
        Ok(self.elem(bits))
    }

    pub fn generator(self: &Arc<Self>, label: &str) -> Result<BoolElem, BoolError> {
        self.generators
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, bits)| self.elem(bits.clone()))
            .ok_or_else(|| BoolError::UnknownGenerator(label.to_string()))
    }

    /// All `2^atom_count` elements, in binary counting order.
    ///
    /// Only sensible for desk-scale algebras.
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = BoolElem> + '_ {
        assert!(self.atom_count < 24, "refusing to enumerate a huge algebra");
        (0u64..(1u64 << self.atom_count)).map(move |mask| {
            let mut bits = FixedBitSet::with_capacity(self.atom_count);
            for i in 0..self.atom_count {
                if mask >> i & 1 == 1 {
                    bits.insert(i);
                }
            }
            self.elem(bits)
        })
    }

    pub fn same(&self, other: &FiniteBoolAlgebra) -> bool {
        self.id == other.id
    }
}

/// An element of a [`FiniteBoolAlgebra`].
#[derive(Clone)]
pub struct BoolElem {
    algebra: Arc<FiniteBoolAlgebra>,
    atoms: FixedBitSet,
}

impl PartialEq for BoolElem {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.same(&other.algebra) && self.atoms == other.atoms
    }
}

impl Eq for BoolElem {}

impl std::hash::Hash for BoolElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.algebra.id.hash(state);
        self.atoms.as_slice().hash(state);
    }
}

impl fmt::Debug for BoolElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, a) in self.atoms.ones().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl BoolElem {
    pub fn algebra(&self) -> &Arc<FiniteBoolAlgebra> {
        &self.algebra
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.atoms.ones()
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.count_ones(..)
    }

    pub fn contains_atom(&self, atom: usize) -> bool {
        self.atoms.contains(atom)
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_clear()
    }

    pub fn is_one(&self) -> bool {
        self.atoms.count_ones(..) == self.algebra.atom_count
    }

    fn check(&self, other: &BoolElem) -> Result<(), BoolError> {
        if self.algebra.same(&other.algebra) {
            Ok(())
        } else {
            Err(BoolError::AlgebraMismatch)
        }
    }

    fn with_bits(&self, atoms: FixedBitSet) -> BoolElem {
        BoolElem {
            algebra: Arc::clone(&self.algebra),
            atoms,
        }
    }

    pub fn meet(&self, other: &BoolElem) -> Result<BoolElem, BoolError> {
        self.check(other)?;
        let mut bits = self.atoms.clone();
        bits.intersect_with(&other.atoms);
        Ok(self.with_bits(bits))
    }

    pub fn join(&self, other: &BoolElem) -> Result<BoolElem, BoolError> {
        self.check(other)?;
        let mut bits = self.atoms.clone();
        bits.union_with(&other.atoms);
        Ok(self.with_bits(bits))
    }

    pub fn symdiff(&self, other: &BoolElem) -> Result<BoolElem, BoolError> {
        self.check(other)?;
        let mut bits = self.atoms.clone();
        bits.symmetric_difference_with(&other.atoms);
        Ok(self.with_bits(bits))
    }

    /// `self ∧ ¬other`.
    pub fn minus(&self, other: &BoolElem) -> Result<BoolElem, BoolError> {
        self.check(other)?;
        let mut bits = self.atoms.clone();
        bits.difference_with(&other.atoms);
        Ok(self.with_bits(bits))
    }

    pub fn complement(&self) -> BoolElem {
        let mut bits = self.atoms.clone();
        bits.toggle_range(..);
        self.with_bits(bits)
    }

    pub fn le(&self, other: &BoolElem) -> Result<bool, BoolError> {
        self.check(other)?;
        Ok(self.atoms.is_subset(&other.atoms))
    }
}

/// A homomorphism between finite Boolean algebras, stored by the images of
/// the source atoms. The images are pairwise disjoint and join to 1.
#[derive(Clone, Debug)]
pub struct BoolHom {
    source: Arc<FiniteBoolAlgebra>,
    target: Arc<FiniteBoolAlgebra>,
    atom_images: Vec<FixedBitSet>,
}

impl PartialEq for BoolHom {
    fn eq(&self, other: &Self) -> bool {
        self.source.same(&other.source)
            && self.target.same(&other.target)
            && self.atom_images == other.atom_images
    }
}

impl BoolHom {
    pub fn from_atom_images(
        source: &Arc<FiniteBoolAlgebra>,
        target: &Arc<FiniteBoolAlgebra>,
        images: Vec<BoolElem>,
    ) -> Result<BoolHom, BoolError> {
        if images.len() != source.atom_count {
            return Err(BoolError::NotAHomomorphism(format!(
                "expected {} atom images, got {}",
                source.atom_count,
                images.len()
            )));
        }
        let mut cover = FixedBitSet::with_capacity(target.atom_count);
        let mut atom_images = Vec::with_capacity(images.len());
        for img in images {
            if !img.algebra.same(target) {
                return Err(BoolError::AlgebraMismatch);
            }
            if !cover.is_disjoint(&img.atoms) {
                return Err(BoolError::NotAHomomorphism(
                    "atom images overlap".to_string(),
                ));
            }
            cover.union_with(&img.atoms);
            atom_images.push(img.atoms);
        }
        if cover.count_ones(..) != target.atom_count {
            return Err(BoolError::NotAHomomorphism(
                "atom images do not join to 1".to_string(),
            ));
        }
        Ok(BoolHom {
            source: Arc::clone(source),
            target: Arc::clone(target),
            atom_images,
        })
    }

    /// Extends an assignment of the source generators to a homomorphism.
    ///
    /// Each source atom is a minterm of the generators; its image is the
    /// matching minterm of the generator images. Fails when the generators
    /// do not separate the atoms, or when a minterm that is empty in the
    /// source has a nonzero image.
    pub fn from_generator_images(
        source: &Arc<FiniteBoolAlgebra>,
        target: &Arc<FiniteBoolAlgebra>,
        images: &BTreeMap<String, BoolElem>,
    ) -> Result<BoolHom, BoolError> {
        let gens: Vec<(&FixedBitSet, &BoolElem)> = source
            .generators
            .iter()
            .map(|(label, bits)| {
                images
                    .get(label)
                    .map(|img| (bits, img))
                    .ok_or_else(|| BoolError::UnknownGenerator(label.clone()))
            })
            .collect::<Result<_, _>>()?;
        for (_, img) in &gens {
            if !img.algebra.same(target) {
                return Err(BoolError::AlgebraMismatch);
            }
        }
        // signature of a source atom = which generators contain it
        let signature =
            |atom: usize| -> Vec<bool> { gens.iter().map(|(g, _)| g.contains(atom)).collect() };
        let mut seen: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
        let mut atom_images = Vec::with_capacity(source.atom_count);
        for atom in 0..source.atom_count {
            let sig = signature(atom);
            if let Some(prev) = seen.insert(sig.clone(), atom) {
                return Err(BoolError::NotAHomomorphism(format!(
                    "generators do not separate atoms {prev} and {atom}"
                )));
            }
            let mut img = FixedBitSet::with_capacity(target.atom_count);
            img.insert_range(..);
            for ((_, g), inside) in gens.iter().zip(&sig) {
                if *inside {
                    img.intersect_with(&g.atoms);
                } else {
                    img.difference_with(&g.atoms);
                }
            }
            atom_images.push(img);
        }
        let mut cover = FixedBitSet::with_capacity(target.atom_count);
        for img in &atom_images {
            cover.union_with(img);
        }
        if cover.count_ones(..) != target.atom_count {
            return Err(BoolError::NotAHomomorphism(
                "a minterm that is empty in the source has a nonzero image".to_string(),
            ));
        }
        Ok(BoolHom {
            source: Arc::clone(source),
            target: Arc::clone(target),
            atom_images,
        })
    }

    pub fn source(&self) -> &Arc<FiniteBoolAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteBoolAlgebra> {
        &self.target
    }

    pub fn apply(&self, a: &BoolElem) -> Result<BoolElem, BoolError> {
        if !a.algebra.same(&self.source) {
            return Err(BoolError::AlgebraMismatch);
        }
        let mut bits = FixedBitSet::with_capacity(self.target.atom_count);
        for atom in a.atoms.ones() {
            bits.union_with(&self.atom_images[atom]);
        }
        Ok(self.target.elem(bits))
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &BoolHom) -> Result<BoolHom, BoolError> {
        if !self.target.same(&other.source) {
            return Err(BoolError::AlgebraMismatch);
        }
        let atom_images = self
            .atom_images
            .iter()
            .map(|img| other.apply(&self.target.elem(img.clone())).map(|e| e.atoms))
            .collect::<Result<_, _>>()?;
        Ok(BoolHom {
            source: Arc::clone(&self.source),
            target: Arc::clone(&other.target),
            atom_images,
        })
    }

    /// Elements sent to 0.
    pub fn kernel_top(&self) -> BoolElem {
        let atoms = self
            .atom_images
            .iter()
            .enumerate()
            .filter(|(_, img)| img.is_clear())
            .map(|(i, _)| i);
        self.source.element(atoms).expect("atoms in range")
    }

    /// Checks preservation of 0, 1, complement, meet and join on every
    /// element (pairs for the binary operations).
    pub fn verify_exhaustive(&self) -> bool {
        let elems: Vec<BoolElem> = self.source.elements().collect();
        let img = |e: &BoolElem| self.apply(e).expect("same algebra");
        if !img(&self.source.zero()).is_zero() || !img(&self.source.one()).is_one() {
            return false;
        }
        for a in &elems {
            let fa = img(a);
            if img(&a.complement()) != fa.complement() {
                return false;
            }
            for b in &elems {
                let fb = img(b);
                if img(&a.meet(b).unwrap()) != fa.meet(&fb).unwrap()
                    || img(&a.join(b).unwrap()) != fa.join(&fb).unwrap()
                {
                    return false;
                }
            }
        }
        true
    }
}

/// Every homomorphism `source → target`.
///
/// A homomorphism of finite power-set algebras is dual to a map from target
/// atoms to source atoms, so there are `|source atoms|^|target atoms|` of them.
pub fn homomorphisms(
    source: &Arc<FiniteBoolAlgebra>,
    target: &Arc<FiniteBoolAlgebra>,
) -> Vec<BoolHom> {
    let (s, t) = (source.atom_count, target.atom_count);
    if s == 0 {
        // only the degenerate target admits a map out of the one-point algebra
        return if t == 0 {
            vec![BoolHom {
                source: Arc::clone(source),
                target: Arc::clone(target),
                atom_images: vec![],
            }]
        } else {
            vec![]
        };
    }
    let total = s.pow(t as u32);
    (0..total)
        .map(|mut code| {
            let mut atom_images = vec![FixedBitSet::with_capacity(t); s];
            for tgt_atom in 0..t {
                atom_images[code % s].insert(tgt_atom);
                code /= s;
            }
            BoolHom {
                source: Arc::clone(source),
                target: Arc::clone(target),
                atom_images,
            }
        })
        .collect()
}

/// The tensor product `A ⊗ B` with its two injections.
#[derive(Clone, Debug)]
pub struct Coproduct {
    pub algebra: Arc<FiniteBoolAlgebra>,
    pub left: BoolHom,
    pub right: BoolHom,
}

impl Coproduct {
    /// `a ⊗ b`, the meet of the two injected elements.
    pub fn tensor(&self, a: &BoolElem, b: &BoolElem) -> Result<BoolElem, BoolError> {
        self.left.apply(a)?.meet(&self.right.apply(b)?)
    }

    /// The unique `h: A ⊗ B → C` with `h ∘ left = f` and `h ∘ right = g`.
    pub fn factor(&self, f: &BoolHom, g: &BoolHom) -> Result<BoolHom, BoolError> {
        if !f.target.same(&g.target)
            || !f.source.same(&self.left.source)
            || !g.source.same(&self.right.source)
        {
            return Err(BoolError::AlgebraMismatch);
        }
        let nb = g.source.atom_count;
        let atom_images = (0..self.algebra.atom_count)
            .map(|pair| {
                let mut img = f.atom_images[pair / nb].clone();
                img.intersect_with(&g.atom_images[pair % nb]);
                img
            })
            .collect();
        Ok(BoolHom {
            source: Arc::clone(&self.algebra),
            target: Arc::clone(&f.target),
            atom_images,
        })
    }
}

pub fn coproduct(
    a: &Arc<FiniteBoolAlgebra>,
    b: &Arc<FiniteBoolAlgebra>,
) -> Result<Coproduct, BoolError> {
    coproduct_with_cap(a, b, DEFAULT_ATOM_CAP)
}

/// Atoms of `A ⊗ B` are pairs `(i, j)`, indexed `i * |B| + j`.
pub fn coproduct_with_cap(
    a: &Arc<FiniteBoolAlgebra>,
    b: &Arc<FiniteBoolAlgebra>,
    cap: usize,
) -> Result<Coproduct, BoolError> {
    let (na, nb) = (a.atom_count, b.atom_count);
    let atoms = na
        .checked_mul(nb)
        .filter(|&n| n <= cap)
        .ok_or(BoolError::SizeOverflow {
            atoms: na.saturating_mul(nb),
            cap,
        })?;
    let pairs_with = |pred: &dyn Fn(usize, usize) -> bool| -> Vec<usize> {
        (0..atoms).filter(|&p| pred(p / nb.max(1), p % nb.max(1))).collect()
    };
    let mut gens: Vec<(String, Vec<usize>)> = Vec::new();
    for (label, bits) in &a.generators {
        gens.push((format!("l:{label}"), pairs_with(&|i, _| bits.contains(i))));
    }
    for (label, bits) in &b.generators {
        gens.push((format!("r:{label}"), pairs_with(&|_, j| bits.contains(j))));
    }
    let algebra = FiniteBoolAlgebra::with_generators(atoms, gens)?;
    let inj = |src: &Arc<FiniteBoolAlgebra>, left: bool| {
        let images = (0..src.atom_count)
            .map(|k| {
                algebra
                    .element(pairs_with(&|i, j| if left { i == k } else { j == k }))
                    .expect("in range")
            })
            .collect();
        BoolHom::from_atom_images(src, &algebra, images)
    };
    let left = inj(a, true)?;
    let right = inj(b, false)?;
    Ok(Coproduct {
        algebra,
        left,
        right,
    })
}

/// An ideal of a finite Boolean algebra. Finite ideals are principal, so the
/// ideal is stored by its largest member.
#[derive(Clone, Debug, PartialEq)]
pub struct BoolIdeal {
    top: BoolElem,
}

impl BoolIdeal {
    pub fn principal(top: BoolElem) -> BoolIdeal {
        BoolIdeal { top }
    }

    /// Validates that `members` is a downward-closed, join-closed set
    /// containing 0.
    pub fn from_members(
        algebra: &Arc<FiniteBoolAlgebra>,
        members: &[BoolElem],
    ) -> Result<BoolIdeal, BoolError> {
        let mut distinct: Vec<&BoolElem> = Vec::new();
        let mut top = algebra.zero();
        for m in members {
            if !m.algebra.same(algebra) {
                return Err(BoolError::AlgebraMismatch);
            }
            if !distinct.contains(&m) {
                distinct.push(m);
            }
            top = top.join(m)?;
        }
        if !distinct.iter().any(|m| m.is_zero()) {
            return Err(BoolError::NotAnIdeal("0 is not a member".to_string()));
        }
        if !distinct.contains(&&top) {
            return Err(BoolError::NotAnIdeal("not closed under joins".to_string()));
        }
        // every member lies below `top`; downward closure means all 2^|top| of them are present
        let expected = 1usize
            .checked_shl(top.atom_count() as u32)
            .unwrap_or(usize::MAX);
        if distinct.len() != expected {
            return Err(BoolError::NotAnIdeal("not downward closed".to_string()));
        }
        Ok(BoolIdeal { top })
    }

    pub fn top(&self) -> &BoolElem {
        &self.top
    }

    pub fn contains(&self, a: &BoolElem) -> Result<bool, BoolError> {
        a.le(&self.top)
    }

    pub fn members(&self) -> Vec<BoolElem> {
        let atoms: Vec<usize> = self.top.atoms().collect();
        (0u64..(1u64 << atoms.len()))
            .map(|mask| {
                let chosen = atoms
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &a)| a);
                self.top.algebra.element(chosen).expect("in range")
            })
            .collect()
    }

    /// `a ∼ b` iff `a ⊕ b` lies in the ideal.
    pub fn equivalent(&self, a: &BoolElem, b: &BoolElem) -> Result<bool, BoolError> {
        self.contains(&a.symdiff(b)?)
    }
}

/// `A / I` with the canonical surjection. Atoms of the quotient are the atoms
/// of `A` outside the top of `I`, in their original order.
pub fn quotient_by_ideal(
    algebra: &Arc<FiniteBoolAlgebra>,
    ideal: &BoolIdeal,
) -> Result<(Arc<FiniteBoolAlgebra>, BoolHom), BoolError> {
    if !ideal.top.algebra.same(algebra) {
        return Err(BoolError::AlgebraMismatch);
    }
    let survivors: Vec<usize> = (0..algebra.atom_count)
        .filter(|&a| !ideal.top.contains_atom(a))
        .collect();
    let mut index = vec![None; algebra.atom_count];
    for (new, &old) in survivors.iter().enumerate() {
        index[old] = Some(new);
    }
    let gens = algebra
        .generators
        .iter()
        .map(|(label, bits)| {
            (
                label.clone(),
                bits.ones().filter_map(|a| index[a]).collect::<Vec<_>>(),
            )
        })
        .collect();
    let quotient = FiniteBoolAlgebra::with_generators(survivors.len(), gens)?;
    let images = index
        .iter()
        .map(|slot| quotient.element(slot.iter().copied()).expect("in range"))
        .collect();
    let surjection = BoolHom::from_atom_images(algebra, &quotient, images)?;
    Ok((quotient, surjection))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meet_examples() {
        let alg = FiniteBoolAlgebra::new(3);
        let a = alg.element([0, 1]).unwrap();
        let b = alg.element([1, 2]).unwrap();
        assert_eq!(a.meet(&b).unwrap(), alg.element([1]).unwrap());
        assert_eq!(a.meet(&alg.one()).unwrap(), a);
        assert!(a.meet(&a.complement()).unwrap().is_zero());
        assert!(a.symdiff(&a).unwrap().is_zero());
        assert_eq!(a.symdiff(&alg.zero()).unwrap(), a);
    }

    #[test]
    fn cross_algebra_is_an_error() {
        let x = FiniteBoolAlgebra::new(2);
        let y = FiniteBoolAlgebra::new(2);
        assert_eq!(
            x.one().meet(&y.one()).unwrap_err(),
            BoolError::AlgebraMismatch
        );
    }

    #[test]
    fn de_morgan_exhaustive_three_atoms() {
        let alg = FiniteBoolAlgebra::new(3);
        let elems: Vec<_> = alg.elements().collect();
        let mut pairs = 0;
        for a in &elems {
            for b in &elems {
                let lhs = a.meet(b).unwrap().complement();
                let rhs = a.complement().join(&b.complement()).unwrap();
                assert_eq!(lhs, rhs);
                pairs += 1;
            }
        }
        assert_eq!(pairs, 64);
    }

    #[test]
    fn coproduct_sizes_and_tensor() {
        let a = FiniteBoolAlgebra::new(2);
        let b = FiniteBoolAlgebra::new(3);
        let cp = coproduct(&a, &b).unwrap();
        assert_eq!(cp.algebra.atom_count(), 6);
        let x = a.atom(1).unwrap();
        let y = b.element([0, 2]).unwrap();
        assert_eq!(
            cp.tensor(&x, &y).unwrap(),
            cp.algebra.element([3, 5]).unwrap()
        );
        assert!(cp.tensor(&a.zero(), &y).unwrap().is_zero());
        assert!(cp.tensor(&x, &b.zero()).unwrap().is_zero());
        assert!(cp.left.verify_exhaustive() && cp.right.verify_exhaustive());
    }

    #[test]
    fn coproduct_cap() {
        let a = FiniteBoolAlgebra::new(5);
        let err = coproduct_with_cap(&a, &a, 16).unwrap_err();
        assert_eq!(err, BoolError::SizeOverflow { atoms: 25, cap: 16 });
    }

    #[test]
    fn quotient_examples() {
        let alg = FiniteBoolAlgebra::new(3);
        let (q, pi) = quotient_by_ideal(&alg, &BoolIdeal::principal(alg.zero())).unwrap();
        assert_eq!(q.atom_count(), 3);
        assert!(pi.verify_exhaustive());

        let (q, pi) = quotient_by_ideal(&alg, &BoolIdeal::principal(alg.one())).unwrap();
        assert_eq!(q.atom_count(), 0);
        assert!(pi.apply(&alg.one()).unwrap().is_zero());
        assert!(pi.apply(&alg.one()).unwrap().is_one());

        let ideal = BoolIdeal::principal(alg.atom(2).unwrap());
        let (q, pi) = quotient_by_ideal(&alg, &ideal).unwrap();
        assert_eq!(q.atom_count(), 2);
        assert!(pi.apply(&alg.atom(2).unwrap()).unwrap().is_zero());
        assert_eq!(pi.apply(&alg.atom(1).unwrap()).unwrap(), q.atom(1).unwrap());
        assert_eq!(pi.kernel_top(), *ideal.top());
    }

    #[test]
    fn ideal_validation() {
        let alg = FiniteBoolAlgebra::new(3);
        let a = alg.atom(0).unwrap();
        let b = alg.atom(1).unwrap();
        let ab = a.join(&b).unwrap();
        assert!(BoolIdeal::from_members(&alg, &[alg.zero(), a.clone(), b.clone(), ab.clone()]).is_ok());
        assert!(matches!(
            BoolIdeal::from_members(&alg, &[alg.zero(), a.clone(), b.clone()]),
            Err(BoolError::NotAnIdeal(_))
        ));
        assert!(matches!(
            BoolIdeal::from_members(&alg, &[alg.zero(), ab]),
            Err(BoolError::NotAnIdeal(_))
        ));
        assert!(matches!(
            BoolIdeal::from_members(&alg, &[a]),
            Err(BoolError::NotAnIdeal(_))
        ));
    }

    #[test]
    fn generator_images_extend() {
        let src = FiniteBoolAlgebra::with_generators(4, vec![("p", vec![0, 1]), ("q", vec![0, 2])])
            .unwrap();
        let tgt = FiniteBoolAlgebra::new(2);
        let mut images = BTreeMap::new();
        images.insert("p".to_string(), tgt.atom(0).unwrap());
        images.insert("q".to_string(), tgt.one());
        let h = BoolHom::from_generator_images(&src, &tgt, &images).unwrap();
        assert!(h.verify_exhaustive());
        assert_eq!(h.apply(&src.atom(0).unwrap()).unwrap(), tgt.atom(0).unwrap());

        let unseparated =
            FiniteBoolAlgebra::with_generators(3, vec![("p", vec![0])]).unwrap();
        let mut images = BTreeMap::new();
        images.insert("p".to_string(), tgt.atom(0).unwrap());
        assert!(matches!(
            BoolHom::from_generator_images(&unseparated, &tgt, &images),
            Err(BoolError::NotAHomomorphism(_))
        ));
    }
}
