//! Construction of the two explicit relator families: the absorption
//! relator `gamma x y^p x y^(p+1) ... x y^(p+q)` forcing an element into
//! the image of a designated free pair, and the stabilization relator
//! `gamma^-q prod kappa_i gamma_1 kappa_i^-1` forcing a stable norm bound.
//! Both come with syntactic consequence certificates and joint piece
//! reports, plus a doubling parameter tuner.

use crate::error::{Error, Result};
use crate::norms::{conjugate_product, ConjugatePower};
use crate::smallcancel::{joint_report, Rational, RelatorSet, SCReport};
use crate::words::{cyclic_reduce, primitive_root, Word};
use serde::{Deserialize, Serialize};

/// Parameters of one absorption relator: absorb `gamma` into the subgroup
/// generated by the free pair `x, y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorptionSpec {
    pub gamma: Word,
    pub x: Word,
    pub y: Word,
    pub p: u64,
    pub q: u64,
}

impl AbsorptionSpec {
    pub fn new(gamma: Word, x: Word, y: Word, p: u64, q: u64) -> Result<Self> {
        if gamma.is_identity() {
            return Err(Error::InvalidSpec("gamma must be nontrivial".into()));
        }
        let (_, e) = primitive_root(&gamma)?;
        if e != 1 {
            return Err(Error::InvalidSpec(format!(
                "gamma is a proper power (exponent {e})"
            )));
        }
        if x.is_identity() || y.is_identity() {
            return Err(Error::InvalidSpec("x and y must be nontrivial".into()));
        }
        // in a free group two elements generate a rank-2 free subgroup
        // exactly when they do not commute
        if x.mul(&y) == y.mul(&x) {
            return Err(Error::InvalidSpec("x and y must be a free pair".into()));
        }
        if p == 0 || q == 0 {
            return Err(Error::InvalidSpec("p and q must be positive".into()));
        }
        Ok(AbsorptionSpec { gamma, x, y, p, q })
    }

    /// The `x y^p x y^(p+1) ... x y^(p+q)` tail.
    pub fn tail(&self) -> Word {
        let mut tail = Word::identity();
        for j in self.p..=self.p + self.q {
            tail = tail.mul(&self.x).mul(&self.y.pow(j as i64));
        }
        tail
    }

    /// Inclusive range of y-exponents used by the tail; later stages keep
    /// their ranges disjoint to tame cross pieces.
    pub fn exponent_range(&self) -> (u64, u64) {
        (self.p, self.p + self.q)
    }
}

/// Parameters of one stabilization relator, with the norm certificate of
/// the inner element: `gamma_1` is a product of `gamma1_bound` conjugates
/// of `alpha^{+-1}` as witnessed by `gamma1_expression`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SclSpec {
    pub gamma: Word,
    pub gamma1: Word,
    pub alpha: Word,
    pub gamma1_bound: u64,
    pub gamma1_expression: Vec<ConjugatePower>,
    pub kappas: Vec<Word>,
    pub q: u64,
    pub sigma: Rational,
}

impl SclSpec {
    pub fn new(
        gamma: Word,
        gamma1: Word,
        alpha: Word,
        gamma1_expression: Vec<ConjugatePower>,
        kappas: Vec<Word>,
        q: u64,
        sigma: Rational,
    ) -> Result<Self> {
        if gamma.is_identity() || gamma1.is_identity() || alpha.is_identity() {
            return Err(Error::InvalidSpec("elements must be nontrivial".into()));
        }
        if kappas.is_empty() || q == 0 {
            return Err(Error::InvalidSpec("need p >= 1 and q >= 1".into()));
        }
        for (i, k) in kappas.iter().enumerate() {
            if kappas[..i].contains(k) {
                return Err(Error::InvalidSpec("kappas must be pairwise distinct".into()));
            }
        }
        if conjugate_product(&alpha, &gamma1_expression) != gamma1 {
            return Err(Error::InvalidSpec(
                "gamma1 expression does not multiply out to gamma1".into(),
            ));
        }
        let spec = SclSpec {
            gamma,
            gamma1,
            alpha,
            gamma1_bound: gamma1_expression.len() as u64,
            gamma1_expression,
            kappas,
            q,
            sigma,
        };
        if spec.stable_bound() >= sigma {
            return Err(Error::InvalidSpec(format!(
                "p*L/q = {} is not below sigma = {sigma}",
                spec.stable_bound()
            )));
        }
        Ok(spec)
    }

    pub fn p(&self) -> u64 {
        self.kappas.len() as u64
    }

    /// `p * L / q`, the certified stable bound.
    pub fn stable_bound(&self) -> Rational {
        Rational::new(
            (self.p() * self.gamma1_bound) as i64,
            self.q as i64,
        )
    }

    /// `prod kappa_i gamma_1 kappa_i^-1`.
    pub fn conjugate_side(&self) -> Word {
        self.kappas
            .iter()
            .fold(Word::identity(), |acc, k| acc.mul(&self.gamma1.conjugate(k)))
    }
}

/// The structured consequence a relator certificate claims in the quotient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Consequence {
    /// `gamma = expression` in the quotient: absorption into the pair
    Absorbed {
        gamma: Word,
        expression: Word,
        /// free-group identity `gamma * expression^-1`, conjugate to the core
        identity: Word,
    },
    /// `gamma^q = conjugate_side` in the quotient, so
    /// `ell_alpha(gamma^q) <= p*L` and the stable bound follows
    StableNorm {
        gamma: Word,
        q: u64,
        alpha: Word,
        conjugate_side: Word,
        conjugate_count: u64,
        bound: Rational,
    },
    /// plain relator, no structured claim
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelatorKind {
    Absorption(AbsorptionSpec),
    Scl(SclSpec),
    Plain,
}

/// A relator together with its generating spec, joint piece report against
/// the ambient set, and the syntactic consequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatorCertificate {
    /// cyclically reduced relator, ready to push
    pub relator: Word,
    pub kind: RelatorKind,
    pub report: SCReport,
    pub consequence: Consequence,
    /// the relator is not a proper power
    pub primitive: bool,
}

impl RelatorCertificate {
    /// Check the consequence's free-group identity. Independent of any
    /// quotient: pure cancellation.
    pub fn verify_consequence(&self) -> Result<()> {
        match &self.consequence {
            Consequence::Absorbed {
                gamma,
                expression,
                identity,
            } => {
                if gamma.mul(&expression.inverse()) != *identity {
                    return Err(Error::invalid("absorption identity does not reduce"));
                }
                if cyclic_reduce(identity).word != self.relator {
                    return Err(Error::invalid("identity is not conjugate to the relator"));
                }
                Ok(())
            }
            Consequence::StableNorm {
                gamma,
                q,
                conjugate_side,
                ..
            } => {
                let recomposed = gamma
                    .pow(-(*q as i64))
                    .mul(conjugate_side);
                if cyclic_reduce(&recomposed).word != self.relator {
                    return Err(Error::invalid(
                        "stable-norm identity is not conjugate to the relator",
                    ));
                }
                // relator . side^-1 . gamma^q frees to the identity
                let probe = recomposed
                    .mul(&conjugate_side.inverse())
                    .mul(&gamma.pow(*q as i64));
                if !probe.is_identity() {
                    return Err(Error::invalid("stable-norm identity does not reduce"));
                }
                Ok(())
            }
            Consequence::None => Ok(()),
        }
    }
}

fn certify(
    relator_full: Word,
    kind: RelatorKind,
    consequence: Consequence,
    ambient: &RelatorSet,
    lambda0: Rational,
    epsilon0: Rational,
) -> Result<RelatorCertificate> {
    let core = cyclic_reduce(&relator_full).word;
    let new_set = RelatorSet::normalized(ambient.alphabet.clone(), &[core.clone()])?;
    let report = joint_report(&[ambient.clone(), new_set], lambda0, epsilon0)?;
    let (_, e) = primitive_root(&core)?;
    Ok(RelatorCertificate {
        relator: core,
        kind,
        report,
        consequence,
        primitive: e == 1,
    })
}

/// Build and certify one absorption relator against an ambient set.
pub fn absorption_relator(
    spec: AbsorptionSpec,
    ambient: &RelatorSet,
    lambda0: Rational,
    epsilon0: Rational,
) -> Result<RelatorCertificate> {
    let tail = spec.tail();
    let identity = spec.gamma.mul(&tail);
    if (identity.len() as u64) < 2 * (spec.p + spec.q) {
        return Err(Error::DegenerateSpec(format!(
            "relator collapsed to length {} < 2(p+q) = {}",
            identity.len(),
            2 * (spec.p + spec.q)
        )));
    }
    let consequence = Consequence::Absorbed {
        gamma: spec.gamma.clone(),
        expression: tail.inverse(),
        identity: identity.clone(),
    };
    let cert = certify(
        identity,
        RelatorKind::Absorption(spec),
        consequence,
        ambient,
        lambda0,
        epsilon0,
    )?;
    cert.verify_consequence()?;
    Ok(cert)
}

/// Build and certify one stabilization relator against an ambient set.
pub fn scl_relator(
    spec: SclSpec,
    ambient: &RelatorSet,
    lambda0: Rational,
    epsilon0: Rational,
) -> Result<RelatorCertificate> {
    let side = spec.conjugate_side();
    let relator_full = spec.gamma.pow(-(spec.q as i64)).mul(&side);
    if relator_full.is_identity() {
        return Err(Error::DegenerateSpec("relator collapsed to the identity".into()));
    }
    let consequence = Consequence::StableNorm {
        gamma: spec.gamma.clone(),
        q: spec.q,
        alpha: spec.alpha.clone(),
        conjugate_side: side,
        conjugate_count: spec.p() * spec.gamma1_bound,
        bound: spec.stable_bound(),
    };
    let cert = certify(
        relator_full,
        RelatorKind::Scl(spec),
        consequence,
        ambient,
        lambda0,
        epsilon0,
    )?;
    cert.verify_consequence()?;
    Ok(cert)
}

/// The deterministic conjugator family `kappa_i = x y^(m+i) x`, `i = 1..p`.
/// Pairwise common prefixes stay at `|x| + m + 1` y-blocks plus one letter.
pub fn kappa_family(x: &Word, y: &Word, count: u64, base_length: u64) -> Vec<Word> {
    (1..=count)
        .map(|i| x.mul(&y.pow((base_length + i) as i64)).mul(x))
        .collect()
}

/// The family a tuner explores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TuneFamily {
    /// doubles p and q from the given start
    Absorption {
        gamma: Word,
        x: Word,
        y: Word,
        start_p: u64,
        start_q: u64,
    },
    /// doubles the kappa base length m and q from the given start;
    /// p is fixed (lambda cannot drop much below 1/p)
    Scl {
        gamma: Word,
        gamma1: Word,
        alpha: Word,
        gamma1_expression: Vec<ConjugatePower>,
        x: Word,
        y: Word,
        p: u64,
        start_m: u64,
        start_q: u64,
        sigma: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuneAttempt {
    pub params: (u64, u64),
    pub lambda: Rational,
    pub t: u64,
    pub strengthened: bool,
}

#[derive(Debug, Clone)]
pub enum TuneResult {
    Tuned {
        certificate: Box<RelatorCertificate>,
        attempts: Vec<TuneAttempt>,
    },
    Failed {
        best: Box<SCReport>,
        attempts: Vec<TuneAttempt>,
    },
}

/// Double parameters until the joint report meets `delta <= lambda0 T` and
/// `T >= 1/epsilon0`, or the cap is hit. Doubling with full re-verification
/// is used because the piece maximum is not monotone in the parameters.
pub fn tune(
    family: &TuneFamily,
    lambda0: Rational,
    epsilon0: Rational,
    ambient: &RelatorSet,
    cap: usize,
) -> Result<TuneResult> {
    let mut attempts = Vec::new();
    let mut best: Option<SCReport> = None;
    for step in 0..cap.max(1) {
        let scale = 1u64 << step.min(40);
        let cert = match family {
            TuneFamily::Absorption {
                gamma,
                x,
                y,
                start_p,
                start_q,
            } => {
                let p = start_p * scale;
                let q = start_q * scale;
                let spec = AbsorptionSpec::new(gamma.clone(), x.clone(), y.clone(), p, q)?;
                absorption_relator(spec, ambient, lambda0, epsilon0)
            }
            TuneFamily::Scl {
                gamma,
                gamma1,
                alpha,
                gamma1_expression,
                x,
                y,
                p,
                start_m,
                start_q,
                sigma,
            } => {
                let m = start_m * scale;
                let q = start_q * scale;
                let kappas = kappa_family(x, y, *p, m);
                let spec = SclSpec::new(
                    gamma.clone(),
                    gamma1.clone(),
                    alpha.clone(),
                    gamma1_expression.clone(),
                    kappas,
                    q,
                    *sigma,
                )?;
                scl_relator(spec, ambient, lambda0, epsilon0)
            }
        };
        let cert = match cert {
            Ok(c) => c,
            Err(Error::DegenerateSpec(_)) => continue,
            Err(e) => return Err(e),
        };
        let params = match family {
            TuneFamily::Absorption { start_p, start_q, .. } => (start_p * scale, start_q * scale),
            TuneFamily::Scl { start_m, start_q, .. } => (start_m * scale, start_q * scale),
        };
        attempts.push(TuneAttempt {
            params,
            lambda: cert.report.lambda,
            t: cert.report.t,
            strengthened: cert.report.strengthened,
        });
        if cert.report.strengthened {
            return Ok(TuneResult::Tuned {
                certificate: Box::new(cert),
                attempts,
            });
        }
        let better = match &best {
            None => true,
            Some(b) => cert.report.lambda < b.lambda || (cert.report.lambda == b.lambda && cert.report.t > b.t),
        };
        if better {
            best = Some(cert.report.clone());
        }
    }
    match best {
        Some(b) => Ok(TuneResult::Failed {
            best: Box::new(b),
            attempts,
        }),
        None => Err(Error::TuningFailed {
            attempts: 0,
            best_lambda: "none".into(),
            best_t: 0,
        }),
    }
}
