//! Cusp cross-section classification for commensurability classes of cusped
//! arithmetic hyperbolic 4-manifolds, with constructive witnesses on the
//! positive side and quaternion-torsion obstructions on the negative side,
//! plus the rank-6 obstruction, the restriction identity, the stabilization
//! count, and the avoiding-class enumerator.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::construct::{form_with_profile, quaternion_representative};
use crate::error::Error;
use crate::matrix::Matrix;
use crate::qform::{
    diagonalize, discriminant_class, invariant_profile, normalize_odd_rank,
    projectively_equivalent, signature, DiagonalForm, InvariantProfile, SymmetricMatrix,
};
use crate::quat::{has_torsion, QuaternionAlgebra};

/// The six orientable compact flat 3-manifolds that occur as cusp
/// cross-sections of orientable hyperbolic 4-manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CuspType {
    Torus,
    HalfTwist,
    HantzscheWendt,
    ThirdTwist,
    QuarterTwist,
    SixthTwist,
}

impl CuspType {
    pub const ALL: [CuspType; 6] = [
        CuspType::Torus,
        CuspType::HalfTwist,
        CuspType::HantzscheWendt,
        CuspType::ThirdTwist,
        CuspType::QuarterTwist,
        CuspType::SixthTwist,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CuspType::Torus => "torus",
            CuspType::HalfTwist => "half_twist",
            CuspType::HantzscheWendt => "hantzsche_wendt",
            CuspType::ThirdTwist => "third_twist",
            CuspType::QuarterTwist => "quarter_twist",
            CuspType::SixthTwist => "sixth_twist",
        }
    }

    pub fn from_name(name: &str) -> Option<CuspType> {
        CuspType::ALL.iter().copied().find(|t| t.name() == name)
    }

    /// Order of the holonomy group (the Hantzsche-Wendt holonomy is the
    /// Klein four-group).
    pub fn holonomy_order(&self) -> u32 {
        match self {
            CuspType::Torus => 1,
            CuspType::HalfTwist => 2,
            CuspType::HantzscheWendt => 4,
            CuspType::ThirdTwist => 3,
            CuspType::QuarterTwist => 4,
            CuspType::SixthTwist => 6,
        }
    }

    /// Whether the holonomy is the Klein four-group rather than cyclic.
    pub fn is_klein_four(&self) -> bool {
        matches!(self, CuspType::HantzscheWendt)
    }

    /// Congruence class of primes that obstruct this cusp type: a bad prime
    /// p = 1 (mod m) rules it out. The three diagonal-holonomy types are
    /// never obstructed.
    pub fn obstruction_modulus(&self) -> Option<u64> {
        match self {
            CuspType::Torus | CuspType::HalfTwist | CuspType::HantzscheWendt => None,
            CuspType::ThirdTwist | CuspType::SixthTwist => Some(3),
            CuspType::QuarterTwist => Some(4),
        }
    }

    /// Torsion order whose absence obstructs this cusp type.
    pub fn torsion_order(&self) -> Option<u32> {
        match self {
            CuspType::ThirdTwist | CuspType::SixthTwist => Some(3),
            CuspType::QuarterTwist => Some(4),
            _ => None,
        }
    }
}

impl fmt::Display for CuspType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A commensurability class of cusped arithmetic hyperbolic 4-manifolds,
/// carried by a signature-(4,1), discriminant -1 representative form and its
/// invariant profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommensurabilityClass {
    profile: InvariantProfile,
    representative: DiagonalForm,
}

impl CommensurabilityClass {
    pub fn new(profile: InvariantProfile, representative: DiagonalForm) -> Result<Self, Error> {
        let computed = invariant_profile(&representative)?;
        assert_eq!(
            computed, profile,
            "representative does not realize the profile"
        );
        let (r, s) = profile.signature;
        if (r, s) != (4, 1) {
            return Err(Error::WrongSignature {
                want_pos: 4,
                want_neg: 1,
                got_pos: r,
                got_neg: s,
            });
        }
        if profile.discriminant_class != BigInt::from(-1) {
            return Err(Error::WrongDiscriminant {
                got: profile.discriminant_class,
            });
        }
        assert_eq!(profile.epsilon_infinity, 1);
        Ok(CommensurabilityClass {
            profile,
            representative,
        })
    }

    pub fn profile(&self) -> &InvariantProfile {
        &self.profile
    }

    pub fn representative(&self) -> &DiagonalForm {
        &self.representative
    }

    /// Finite primes with Hasse-Witt invariant -1.
    pub fn bad_primes(&self) -> &BTreeSet<u64> {
        &self.profile.negative_places
    }
}

/// The commensurability class of a signature-(4,1) form: rescale to
/// discriminant class -1 (multiply by minus the discriminant) and clean
/// square factors out of each coefficient.
pub fn class_of(q: &DiagonalForm) -> Result<CommensurabilityClass, Error> {
    let sig = signature(q);
    if sig != (4, 1) {
        return Err(Error::WrongSignature {
            want_pos: 4,
            want_neg: 1,
            got_pos: sig.0,
            got_neg: sig.1,
        });
    }
    let representative = normalize_odd_rank(q)?.squarefree_coefficients()?;
    let profile = invariant_profile(&representative)?;
    CommensurabilityClass::new(profile, representative)
}

/// Whether the class contains a manifold with a cusp of the given type.
/// Torus, half-twist, and Hantzsche-Wendt cusps always occur; a twisted type
/// with modulus m occurs exactly when no bad prime is 1 mod m.
pub fn admits(c: &CommensurabilityClass, t: CuspType) -> bool {
    match t.obstruction_modulus() {
        None => true,
        Some(m) => !c.bad_primes().iter().any(|&p| p % m == 1),
    }
}

/// The set of admissible cusp types for the class of `q`.
pub fn classify(q: &DiagonalForm) -> Result<BTreeSet<CuspType>, Error> {
    let c = class_of(q)?;
    Ok(CuspType::ALL
        .iter()
        .copied()
        .filter(|&t| admits(&c, t))
        .collect())
}

/// A holonomy representation into SL(3, Z): the generators, with the full
/// finite group recoverable by closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HolonomyRep {
    group_order: u32,
    generators: Vec<Matrix>,
}

impl HolonomyRep {
    pub fn group_order(&self) -> u32 {
        self.group_order
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    /// All elements of the generated group, by closure from the identity.
    pub fn elements(&self) -> Vec<Matrix> {
        let mut elements = vec![Matrix::identity(3)];
        loop {
            let mut grew = false;
            let snapshot = elements.clone();
            for g in &self.generators {
                for e in &snapshot {
                    let prod = e * g;
                    if !elements.contains(&prod) {
                        elements.push(prod);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        assert_eq!(elements.len() as u32, self.group_order);
        elements
    }
}

/// Integer holonomy generators for each cusp type. The three diagonal
/// holonomies consist of +-1 diagonal matrices; the twisted types use the
/// standard order-3, order-4, and order-6 matrices.
pub fn holonomy_rep(t: CuspType) -> HolonomyRep {
    let gens: Vec<Vec<Vec<i64>>> = match t {
        CuspType::Torus => vec![vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]],
        CuspType::HalfTwist => vec![vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]],
        CuspType::HantzscheWendt => vec![
            vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]],
            vec![vec![-1, 0, 0], vec![0, 1, 0], vec![0, 0, -1]],
        ],
        CuspType::ThirdTwist => vec![vec![vec![-1, -1, 0], vec![1, 0, 0], vec![0, 0, 1]]],
        CuspType::QuarterTwist => vec![vec![vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 1]]],
        CuspType::SixthTwist => vec![vec![vec![0, -1, 0], vec![1, 1, 0], vec![0, 0, 1]]],
    };
    HolonomyRep {
        group_order: t.holonomy_order(),
        generators: gens.iter().map(|g| Matrix::from_int_rows(g)).collect(),
    }
}

/// Whether a symmetric matrix is positive definite (Sylvester's criterion on
/// leading principal minors).
pub fn is_positive_definite(m: &SymmetricMatrix) -> bool {
    let n = m.dimension();
    for k in 1..=n {
        let mut minor = Matrix::zero(k, k);
        for i in 0..k {
            for j in 0..k {
                minor[(i, j)] = m.inner()[(i, j)].clone();
            }
        }
        if !minor.det().is_positive() {
            return false;
        }
    }
    true
}

use num_traits::Signed;

/// Average a positive definite seed over the holonomy group:
/// `G = (1/|H|) sum_A A^t S A`. The result is positive definite and exactly
/// invariant under every element of the group.
pub fn invariant_form_average(h: &HolonomyRep, seed: &SymmetricMatrix) -> SymmetricMatrix {
    assert!(is_positive_definite(seed), "seed must be positive definite");
    assert_eq!(seed.dimension(), 3);
    let elements = h.elements();
    let mut sum = Matrix::zero(3, 3);
    for a in &elements {
        sum = &sum + &(&(&a.transpose() * seed.inner()) * a);
    }
    let avg = sum.scale(&BigRational::new(
        BigInt::one(),
        BigInt::from(elements.len() as i64),
    ));
    let result = SymmetricMatrix::new(avg).expect("average of symmetric matrices is symmetric");
    for a in h.generators() {
        assert_eq!(
            &(&a.transpose() * result.inner()) * a,
            *result.inner(),
            "averaged form must be invariant"
        );
    }
    result
}

/// The rank-3 Gram matrix of the holonomy-invariant shape realized by a
/// witness block. Diagonal types preserve any diagonal form; the quarter
/// twist preserves diag(a,a,b); the third and sixth twists preserve the
/// hexagonal shape with Gram [[4a,2a,0],[2a,4a,0],[0,0,3b]] (the -4a x1 x2
/// variant of the same shape differs by the basis sign x2 -> -x2).
fn invariant_block_gram(t: CuspType, block: &DiagonalForm) -> Matrix {
    let c = block.coefficients();
    match t {
        CuspType::Torus
        | CuspType::HalfTwist
        | CuspType::HantzscheWendt
        | CuspType::QuarterTwist => block.gram(),
        CuspType::ThirdTwist | CuspType::SixthTwist => {
            // block = <ab, 3ab, 3>; the invariant Gram uses a = ab, b = 1.
            let ab = c[0].clone();
            let four_ab = &ab * BigRational::from(BigInt::from(4));
            let two_ab = &ab * BigRational::from(BigInt::from(2));
            let mut g = Matrix::zero(3, 3);
            g[(0, 0)] = four_ab.clone();
            g[(1, 1)] = four_ab;
            g[(0, 1)] = two_ab.clone();
            g[(1, 0)] = two_ab;
            g[(2, 2)] = BigRational::from(BigInt::from(3));
            g
        }
    }
}

/// Certify that a witness form's positive rank-3 block carries a
/// holonomy-invariant shape: the shape's Gram matrix is exactly invariant
/// under the generators, and diagonalizing it recovers the block up to
/// square factors coefficient by coefficient.
fn verify_block_invariance(t: CuspType, witness: &DiagonalForm) -> Result<(), Error> {
    let block = DiagonalForm::new(witness.coefficients()[..3].to_vec())?;
    let gram = invariant_block_gram(t, &block);
    for a in holonomy_rep(t).generators() {
        assert_eq!(
            &(&a.transpose() * &gram) * a,
            gram,
            "holonomy must preserve the witness block for {t}"
        );
    }
    let (diag, _) = diagonalize(&SymmetricMatrix::new(gram)?)?;
    assert_eq!(
        diag.squarefree_coefficients()?,
        block.squarefree_coefficients()?,
        "invariant shape must diagonalize to the witness block for {t}"
    );
    Ok(())
}

/// A form in the class whose first three coefficients are a positive block
/// invariant under the cusp type's holonomy, certified projectively
/// equivalent to the class representative.
///
/// Torus, half-twist, and Hantzsche-Wendt cusps take the quaternion-type
/// representative `<x, y, xy, 1, -1>`. The quarter twist takes
/// `<P, P, 1, 1, -1>` with P the product of the class's odd bad primes. The
/// third and sixth twists take `<ab, 3ab, 3, 1, -1>` where ab multiplies the
/// odd bad primes congruent to 2 mod 3, doubled if needed to hit the class's
/// invariant at 3.
pub fn witness_form(c: &CommensurabilityClass, t: CuspType) -> Result<DiagonalForm, Error> {
    if !admits(c, t) {
        return Err(Error::Inadmissible { cusp: t.name() });
    }
    let witness = match t {
        CuspType::Torus | CuspType::HalfTwist | CuspType::HantzscheWendt => {
            quaternion_representative(c.representative())?.form()
        }
        CuspType::QuarterTwist => {
            let p: BigInt = c
                .bad_primes()
                .iter()
                .filter(|&&p| p != 2)
                .map(|&p| BigInt::from(p))
                .product();
            let p = BigRational::from(p);
            DiagonalForm::new(vec![
                p.clone(),
                p,
                BigRational::one(),
                BigRational::one(),
                -BigRational::one(),
            ])?
        }
        CuspType::ThirdTwist | CuspType::SixthTwist => {
            let base: BigInt = c
                .bad_primes()
                .iter()
                .filter(|&&p| p != 2 && p % 3 == 2)
                .map(|&p| BigInt::from(p))
                .product();
            let mut chosen = None;
            for ab in [base.clone(), BigInt::from(2) * &base] {
                let ab = BigRational::from(ab);
                let candidate = DiagonalForm::new(vec![
                    ab.clone(),
                    &ab * BigRational::from(BigInt::from(3)),
                    BigRational::from(BigInt::from(3)),
                    BigRational::one(),
                    -BigRational::one(),
                ])?;
                if invariant_profile(&candidate)? == *c.profile() {
                    chosen = Some(candidate);
                    break;
                }
            }
            chosen.ok_or_else(|| {
                Error::SearchExhausted(format!(
                    "neither ab = {base} nor 2ab matches the class invariant at 3"
                ))
            })?
        }
    };
    verify_block_invariance(t, &witness)?;
    assert!(
        projectively_equivalent(&witness, c.representative())?,
        "witness must land in the class: {witness} vs {}",
        c.representative()
    );
    Ok(witness)
}

/// An affine isometry v -> Av + w of the flat geometry carried by a rank-3
/// positive form: rotation part in SO(q3, Q) plus a rational translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParabolicIsometry {
    pub rotation: Matrix,
    pub translation: Vec<BigRational>,
}

impl ParabolicIsometry {
    /// Checked constructor: the rotation must preserve `q3` and have
    /// determinant 1.
    pub fn new(
        rotation: Matrix,
        translation: Vec<BigRational>,
        q3: &DiagonalForm,
    ) -> Result<Self, Error> {
        assert_eq!(q3.rank(), 3);
        assert_eq!(translation.len(), 3);
        let g = q3.gram();
        if &(&rotation.transpose() * &g) * &rotation != g || rotation.det() != BigRational::one() {
            return Err(Error::NotAnIsometry);
        }
        Ok(ParabolicIsometry {
            rotation,
            translation,
        })
    }

    /// Composition `self` after `other`: (A1, w1)(A2, w2) = (A1 A2, w1 + A1 w2).
    pub fn compose(&self, other: &ParabolicIsometry) -> ParabolicIsometry {
        let rotation = &self.rotation * &other.rotation;
        let moved = self.rotation.apply(&other.translation);
        let translation = self
            .translation
            .iter()
            .zip(moved)
            .map(|(a, b)| a + b)
            .collect();
        ParabolicIsometry {
            rotation,
            translation,
        }
    }
}

/// Embed an affine isometry as a 5x5 rational matrix preserving
/// `Q = q3 + <1, -1>` and fixing the light-like vector y0 = (0,0,0,1,1).
///
/// With f(x) the q3-gradient pairing (f(x)^t v = <v, x> in the q3 inner
/// product) and s = q3(w), the matrix is
///
/// ```text
///   [ A            w        -w      ]
///   [ -f(w)^t A    1 - s/2   s/2    ]
///   [ -f(w)^t A    -s/2      1 + s/2 ]
/// ```
///
/// and phi -> rho(phi) is an injective homomorphism.
pub fn parabolic_embed(phi: &ParabolicIsometry, q3: &DiagonalForm) -> Result<Matrix, Error> {
    assert_eq!(q3.rank(), 3, "ambient form must have rank 3");
    let g = q3.gram();
    let a = &phi.rotation;
    if &(&a.transpose() * &g) * a != g {
        return Err(Error::NotAnIsometry);
    }
    let w = &phi.translation;
    let s = q3.evaluate(w);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let s_half = &s * &half;

    // f(w) = (a1 w1, a2 w2, a3 w3), then the row vector f(w)^t A.
    let f_w: Vec<BigRational> = q3
        .coefficients()
        .iter()
        .zip(w)
        .map(|(c, wi)| c * wi)
        .collect();
    let fa: Vec<BigRational> = (0..3)
        .map(|j| {
            (0..3)
                .map(|i| &f_w[i] * &a[(i, j)])
                .fold(BigRational::zero(), |acc, t| acc + t)
        })
        .collect();

    let mut m = Matrix::zero(5, 5);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = a[(i, j)].clone();
        }
        m[(i, 3)] = w[i].clone();
        m[(i, 4)] = -w[i].clone();
    }
    for j in 0..3 {
        m[(3, j)] = -fa[j].clone();
        m[(4, j)] = -fa[j].clone();
    }
    m[(3, 3)] = BigRational::one() - &s_half;
    m[(3, 4)] = s_half.clone();
    m[(4, 3)] = -s_half.clone();
    m[(4, 4)] = BigRational::one() + &s_half;
    Ok(m)
}

/// The ambient rank-5 Gram matrix `q3 + <1, -1>` used by the embedding.
pub fn ambient_gram(q3: &DiagonalForm) -> Matrix {
    let mut entries: Vec<BigRational> = q3.coefficients().to_vec();
    entries.push(BigRational::one());
    entries.push(-BigRational::one());
    Matrix::diagonal(&entries)
}

/// Whether order-n torsion (n = 3 or 4) is obstructed in the rational
/// isometries attached to the class: the holonomy would sit in the
/// projectivized units of the quaternion algebra (-a,-b / Q) of the class's
/// quaternion-type representative.
pub fn torsion_obstruction(c: &CommensurabilityClass, n: u32) -> Result<bool, Error> {
    assert!(n == 3 || n == 4, "torsion_obstruction: n must be 3 or 4");
    let (a, b) = quaternion_representative(c.representative())?.pair();
    let algebra = QuaternionAlgebra::new(&-BigInt::from(a), &-BigInt::from(b))?;
    Ok(!has_torsion(&algebra, n)?)
}

/// Verdict of the rank-6 product-cusp criterion. Only the obstruction
/// direction is decided; `NotObstructed` makes no existence claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiveDimVerdict {
    Obstructed,
    NotObstructed,
}

/// Obstruction for product cusps one dimension up: a signature-(5,1),
/// discriminant -1 form whose bad primes meet 1 mod m rules out the
/// corresponding twisted product cross-section. Rank 6 is even, so the
/// discriminant cannot be rescaled; anything other than -1 is rejected.
pub fn admits_5d_product(q6: &DiagonalForm, t: CuspType) -> Result<FiveDimVerdict, Error> {
    let sig = signature(q6);
    if sig != (5, 1) {
        return Err(Error::WrongSignature {
            want_pos: 5,
            want_neg: 1,
            got_pos: sig.0,
            got_neg: sig.1,
        });
    }
    let d = discriminant_class(q6)?;
    if d != BigInt::from(-1) {
        return Err(Error::WrongDiscriminant { got: d });
    }
    let profile = invariant_profile(q6)?;
    let obstructed = match t.obstruction_modulus() {
        None => false,
        Some(m) => profile.negative_places.iter().any(|&p| p % m == 1),
    };
    Ok(if obstructed {
        FiveDimVerdict::Obstructed
    } else {
        FiveDimVerdict::NotObstructed
    })
}

/// Restriction identity: a signature-(4,1), discriminant -1 form has the
/// same finite Hasse-Witt data as its rank-6 extension by `<1>`, because
/// every symbol (1, x)_p is trivial. Both profiles are computed and the
/// agreement asserted.
pub fn restriction_profile(f: &DiagonalForm) -> Result<InvariantProfile, Error> {
    let sig = signature(f);
    if sig != (4, 1) {
        return Err(Error::WrongSignature {
            want_pos: 4,
            want_neg: 1,
            got_pos: sig.0,
            got_neg: sig.1,
        });
    }
    let d = discriminant_class(f)?;
    if d != BigInt::from(-1) {
        return Err(Error::WrongDiscriminant { got: d });
    }
    let profile = invariant_profile(f)?;
    let extended = crate::qform::direct_sum(f, &DiagonalForm::from_ints(&[1])?);
    let extended_profile = invariant_profile(&extended)?;
    assert_eq!(
        profile.negative_places, extended_profile.negative_places,
        "adjoining <1> must not move any finite invariant"
    );
    assert_eq!(
        profile.discriminant_class,
        extended_profile.discriminant_class
    );
    assert_eq!(profile.epsilon_infinity, extended_profile.epsilon_infinity);
    Ok(profile)
}

/// Number of circle factors needed to stabilize a flat n-manifold with
/// holonomy of permutation degree m: k = m - n + 3 for even m (total
/// dimension m + 4), k = m - n + 4 for odd m (total dimension m + 5).
pub fn stabilization_k(n: u32, m: u32) -> Result<u32, Error> {
    assert!(n >= 1 && m >= 1, "stabilization_k: n, m must be positive");
    let k = if m.is_multiple_of(2) {
        m as i64 - n as i64 + 3
    } else {
        m as i64 - n as i64 + 4
    };
    if k < 0 {
        return Err(Error::NegativeK { k });
    }
    Ok(k as u32)
}

/// One commensurability class per prime p = 1 (mod m) up to the bound, each
/// with bad primes exactly {2, p} (the companion at 2 is forced by
/// reciprocity), realized constructively and sorted by p. Every returned
/// class fails `admits` for the given twisted type, and distinct bad-prime
/// sets make the classes pairwise non-equivalent.
pub fn enumerate_avoiding(
    t: CuspType,
    prime_bound: u64,
) -> Result<Vec<(u64, CommensurabilityClass)>, Error> {
    let m = t
        .obstruction_modulus()
        .expect("enumerate_avoiding applies to the twisted cusp types");
    let mut out = Vec::new();
    for p in crate::construct::primes_in_class(prime_bound, m, 1) {
        let profile = InvariantProfile {
            signature: (4, 1),
            discriminant_class: BigInt::from(-1),
            negative_places: BTreeSet::from([2, p]),
            epsilon_infinity: 1,
        };
        let representative = form_with_profile(&profile, 5)?;
        let class = CommensurabilityClass::new(profile, representative)?;
        debug_assert!(!admits(&class, t));
        out.push((p, class));
    }
    Ok(out)
}
