//! Computational laboratory for small-cancellation quotients of free
//! groups: exact word algebra on the Cayley tree, piece analysis with
//! rational condition verdicts, Dehn-algorithm word-problem decisions with
//! replayable traces, explicit relator families for element absorption and
//! norm stabilization, finite prefixes of quotient towers with
//! witness/poison ledgers, and a prenex-sentence pipeline with a
//! finite-group oracle.

pub mod dehn;
pub mod error;
pub mod norms;
pub mod presentation;
pub mod relators;
pub mod repro;
pub mod smallcancel;
pub mod snf;
pub mod tower;
pub mod witness;
pub mod words;

pub use error::{Error, Result};
pub use presentation::Presentation;

pub use words::{
    ball, conjugate_in_free, cyclic_reduce, energy, least_rotation, primitive_root,
    translation_length, tree_geometry, Alphabet, CyclicWord, EnergyReport, Letter,
    TranslationLength, TreeGeometry, Word,
};

pub use smallcancel::{
    joint_report, max_piece, max_piece_reference, parse_rational, rational_string, sc_report,
    symmetrize, symmetrize_staged, ElementOrigin, PieceWitness, Rational, RelatorSet, SCReport,
    SymmetrizedSet,
};

pub use dehn::{
    dehn_reduce, eq_in_quotient, injectivity_certificate, is_trivial,
    normal_closure_member_oracle, replay_trace, ConjugateFactor, DehnStep,
    InjectivityCertificate, OracleBudget, OracleOutcome, QuotientHandle, TrivialityStatus,
    TrivialityVerdict,
};

pub use relators::{
    absorption_relator, kappa_family, scl_relator, tune, AbsorptionSpec, Consequence,
    RelatorCertificate, RelatorKind, SclSpec, TuneAttempt, TuneFamily, TuneResult,
};

pub use tower::{
    new_tower, new_tower_with_targets, Goal, GoalOutcome, GoalStatus, Ledger, LedgerDecision,
    Morphism, PoisonCheck, Stage, Tower,
};

pub use witness::{
    classify, ea_to_sentence, finite_truth_via_witnesses, holds_in_finite, is_silly, negate,
    parse_sentence, positively_realizable, realizes_positively_finite, to_ea_normal,
    witness_of_disjunct, AbstractWitness, Classification, Disjunct, EaSentence, FiniteGroup,
    RealizedWitness, Sentence,
};

pub use norms::{
    abelianization, cl_bound, ell_alpha_bound, substitute, w_length_bound, AbelianizationData,
    ConjugatePower, NormBudget, NormCertificate, NormExpression, NormKind, NormOutcome,
};

pub use repro::{repro_remark18, RemarkReport};

/// Derive a stable-norm certificate from a pushed stabilization relator:
/// verify the ratio arithmetic from the stored spec and replay the power
/// identity in the given tower stage.
pub fn stable_bound_from_cert(
    cert: &RelatorCertificate,
    tower: &Tower,
    stage: usize,
) -> Result<NormCertificate> {
    let st = tower.stage(stage)?;
    if !st.cumulative.contains(&cert.relator) {
        return Err(Error::invalid(
            "certificate's relator was not pushed at this stage",
        ));
    }
    let (spec, side, bound, q) = match (&cert.kind, &cert.consequence) {
        (
            RelatorKind::Scl(spec),
            Consequence::StableNorm {
                conjugate_side,
                bound,
                q,
                ..
            },
        ) => (spec, conjugate_side.clone(), *bound, *q),
        _ => return Err(Error::invalid("not a certified stabilization relator")),
    };
    // re-verify the ratio with exact rationals
    let recomputed = Rational::new((spec.p() * spec.gamma1_bound) as i64, spec.q as i64);
    if recomputed != bound || bound >= spec.sigma {
        return Err(Error::invalid("stored ratio does not re-verify"));
    }
    let handle = tower.handle(stage)?;
    let verdict = eq_in_quotient(&spec.gamma.pow(q as i64), &side, &handle);
    if !verdict.is_trivial() {
        return Err(Error::invalid(
            "power identity does not replay at this stage",
        ));
    }
    // expand gamma^q as p * L conjugates of alpha
    let mut factors = Vec::new();
    for kappa in &spec.kappas {
        for f in &spec.gamma1_expression {
            factors.push(ConjugatePower {
                conjugator: kappa.mul(&f.conjugator),
                inverted: f.inverted,
            });
        }
    }
    Ok(NormCertificate {
        element: spec.gamma.clone(),
        kind: NormKind::StableEllAlpha {
            alpha: spec.alpha.clone(),
        },
        bound,
        expression: NormExpression::StablePower {
            q,
            alpha: spec.alpha.clone(),
            factors,
        },
        stage: Some(stage),
    })
}
