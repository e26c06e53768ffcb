//! Local (exponential) stability analysis of the switched linear fluid
//! system.
//!
//! Away from the pending-agent floor the centered fluid dynamics are linear
//! in each of two regimes, split on the sign of the queue difference:
//! the *surplus* regime (agent queue non-empty, `queue_diff >= 0`) and the
//! *deficit* regime (customer queue non-empty, `queue_diff < 0`). This module
//! builds the two regime matrices, decides Hurwitz-ness through the cubic
//! Routh–Hurwitz test, evaluates the sufficient gain conditions for
//! exponential stability of the switched system, and decides existence of a
//! common quadratic Lyapunov function (CQLF) through the rank-one criterion:
//! two Hurwitz matrices whose difference has rank one admit a CQLF iff their
//! product has no negative real eigenvalue.

use nalgebra::Matrix3;
use serde::Serialize;

use crate::cubic::CubicCoeffs;
use crate::params::ModelParams;

/// The two regime matrices of the switched linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchedPair {
    /// Dynamics for `queue_diff >= 0` (agent surplus).
    pub surplus: Matrix3<f64>,
    /// Dynamics for `queue_diff < 0` (agent deficit).
    pub deficit: Matrix3<f64>,
}

impl SwitchedPair {
    /// Builds both regime matrices from the model parameters.
    ///
    /// State ordering is `(pending, queue_diff, agents)`.
    pub fn from_params(p: &ModelParams) -> Self {
        let (alpha, beta, mu) = (p.alpha, p.beta, p.mu);
        let (delta, theta) = (p.delta, p.theta);
        let (gamma, epsilon) = (p.gamma, p.epsilon);

        let surplus = Matrix3::new(
            -gamma * beta,
            gamma * alpha * mu + gamma * theta - epsilon,
            -gamma * alpha * mu,
            beta,
            -alpha * mu - theta,
            alpha * mu,
            beta,
            (1.0 - alpha) * mu - theta,
            -(1.0 - alpha) * mu,
        );
        let deficit = Matrix3::new(
            -gamma * beta,
            gamma * delta - epsilon,
            -gamma * alpha * mu,
            beta,
            -delta,
            alpha * mu,
            beta,
            0.0,
            -(1.0 - alpha) * mu,
        );
        SwitchedPair { surplus, deficit }
    }

    /// Rank of `surplus - deficit`, computed structurally: the two matrices
    /// can differ only in the middle column, so the rank is 1 when that
    /// column differs and 0 when the matrices coincide. Returns 2 if the
    /// structural assumption is broken (hand-built pairs only).
    pub fn difference_rank(&self) -> usize {
        for row in 0..3 {
            for col in [0, 2] {
                if self.surplus[(row, col)] != self.deficit[(row, col)] {
                    return 2;
                }
            }
        }
        let middle_differs =
            (0..3).any(|row| self.surplus[(row, 1)] != self.deficit[(row, 1)]);
        usize::from(middle_differs)
    }
}

/// Characteristic polynomial `det(s I - M)` of a 3x3 matrix, returned monic:
/// `(1, -trace, sum of principal 2x2 minors, -det)`.
pub fn characteristic_cubic(m: &Matrix3<f64>) -> CubicCoeffs {
    let trace = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let minor_sum = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    CubicCoeffs::new(1.0, -trace, minor_sum, -m.determinant())
}

/// Closed-form Hurwitz criterion for the deficit-regime matrix:
/// `((beta gamma + delta)/mu + (1 - alpha)) * ((beta gamma mu + delta mu (1 - alpha))/(beta epsilon) + 1) > 1`.
///
/// Agrees with the Routh–Hurwitz evaluation of the deficit characteristic
/// polynomial on every valid parameter set.
pub fn deficit_hurwitz_condition(p: &ModelParams) -> bool {
    let lhs = ((p.beta * p.gamma + p.delta) / p.mu + (1.0 - p.alpha))
        * ((p.beta * p.gamma * p.mu + p.delta * p.mu * (1.0 - p.alpha)) / (p.beta * p.epsilon)
            + 1.0);
    lhs > 1.0
}

/// Outcome of one sufficient gain condition: `gamma` must strictly exceed
/// both lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainCondition {
    pub satisfied: bool,
    /// The two operands of the `max{...}` lower bound: the rational bound
    /// first, the square-root bound second.
    pub bounds: [f64; 2],
}

impl GainCondition {
    fn evaluate(gamma: f64, bounds: [f64; 2]) -> Self {
        GainCondition {
            satisfied: gamma > bounds[0] && gamma > bounds[1],
            bounds,
        }
    }

    /// The dominant lower bound.
    pub fn threshold(&self) -> f64 {
        self.bounds[0].max(self.bounds[1])
    }
}

/// First sufficient condition for exponential stability of the switched
/// system: `gamma > max{ (alpha mu - delta)/beta,
/// sqrt(((2 - alpha) epsilon mu + alpha epsilon delta)/(beta mu)) }`.
///
/// Strict inequality, no tolerance slack: `gamma` is a design parameter.
pub fn condition_i(p: &ModelParams) -> GainCondition {
    let bound_ratio = (p.alpha * p.mu - p.delta) / p.beta;
    let bound_sqrt =
        (((2.0 - p.alpha) * p.epsilon * p.mu + p.alpha * p.epsilon * p.delta) / (p.beta * p.mu))
            .sqrt();
    GainCondition::evaluate(p.gamma, [bound_ratio, bound_sqrt])
}

/// Second sufficient condition:
/// `gamma > max{ (alpha mu - delta + sqrt((alpha mu - delta)^2 + 4 alpha mu^2))/(2 beta),
/// sqrt(max{alpha epsilon (delta - mu)/(beta mu), 0}) }`.
pub fn condition_ii(p: &ModelParams) -> GainCondition {
    let gap = p.alpha * p.mu - p.delta;
    let bound_root =
        (gap + (gap * gap + 4.0 * p.alpha * p.mu * p.mu).sqrt()) / (2.0 * p.beta);
    let bound_sqrt = (p.alpha * p.epsilon * (p.delta - p.mu) / (p.beta * p.mu))
        .max(0.0)
        .sqrt();
    GainCondition::evaluate(p.gamma, [bound_root, bound_sqrt])
}

/// Three-valued outcome of the CQLF existence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CqlfVerdict {
    Exists,
    NotExists,
    /// A real eigenvalue of the regime product sits within tolerance of
    /// zero, so the exact criterion cannot be decided numerically.
    Undetermined,
}

impl CqlfVerdict {
    pub fn is_exists(&self) -> bool {
        matches!(self, CqlfVerdict::Exists)
    }
}

/// Decides CQLF existence for the regime pair.
///
/// Requires both matrices Hurwitz and a rank-one difference; then a CQLF
/// exists iff the product `surplus * deficit` has no negative real
/// eigenvalue. Real eigenvalues within `1e-9 * (1 + ||product||_inf)` of zero
/// make the answer [`CqlfVerdict::Undetermined`] rather than a guess.
/// A rank-zero difference means the two regimes coincide, and a single
/// Hurwitz matrix always admits a quadratic Lyapunov function. Hand-built
/// pairs whose difference spreads beyond the middle column fall outside the
/// criterion and come back undetermined.
pub fn cqlf_exists(pair: &SwitchedPair) -> CqlfVerdict {
    let surplus_hurwitz = characteristic_cubic(&pair.surplus)
        .is_hurwitz()
        .unwrap_or(false);
    let deficit_hurwitz = characteristic_cubic(&pair.deficit)
        .is_hurwitz()
        .unwrap_or(false);
    if !surplus_hurwitz || !deficit_hurwitz {
        return CqlfVerdict::NotExists;
    }
    match pair.difference_rank() {
        0 => return CqlfVerdict::Exists,
        1 => {}
        _ => return CqlfVerdict::Undetermined,
    }

    let product = pair.surplus * pair.deficit;
    let inf_norm = (0..3)
        .map(|i| (0..3).map(|j| product[(i, j)].abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let tol = 1e-9 * (1.0 + inf_norm);

    let cubic = characteristic_cubic(&product);
    let mut marginal = false;
    for root in cubic.real_roots() {
        if root < -tol {
            return CqlfVerdict::NotExists;
        }
        if root < tol {
            // The product's determinant is the square of both regime
            // determinants' common magnitude, so a root this close to zero
            // is usually a genuinely tiny positive eigenvalue. Resolve its
            // sign where the refinement error bound allows; otherwise the
            // verdict stays undetermined.
            match resolve_near_zero_root_sign(&cubic) {
                Some(sign) if sign < 0.0 => return CqlfVerdict::NotExists,
                Some(_) => {}
                None => marginal = true,
            }
        }
    }
    if marginal {
        CqlfVerdict::Undetermined
    } else {
        CqlfVerdict::Exists
    }
}

/// Determines the sign of a near-zero real root of `cubic`, or `None` when
/// the refinement error bound cannot separate it from zero.
///
/// Starts Newton from the small-root expansion `-a3/a2` and bounds the
/// result by the backward error of the polynomial evaluation.
fn resolve_near_zero_root_sign(cubic: &CubicCoeffs) -> Option<f64> {
    if cubic.a2 == 0.0 {
        return None;
    }
    let mut s = -cubic.a3 / cubic.a2;
    for _ in 0..4 {
        let f = cubic.eval(s);
        let df = cubic.derivative_at(s);
        if df.abs() < 1e-300 {
            return None;
        }
        let step = f / df;
        if !step.is_finite() {
            return None;
        }
        s -= step;
    }
    let df = cubic.derivative_at(s);
    if df.abs() < 1e-300 {
        return None;
    }
    let eval_scale = cubic.a0.abs() * s.abs().powi(3)
        + cubic.a1.abs() * s * s
        + cubic.a2.abs() * s.abs()
        + cubic.a3.abs();
    let err = 32.0 * f64::EPSILON * eval_scale / df.abs();
    if s.abs() > err {
        Some(s.signum())
    } else {
        None
    }
}

/// Closed-form inverse of the surplus-regime matrix.
pub fn surplus_inverse(p: &ModelParams) -> Matrix3<f64> {
    let (alpha, beta, mu) = (p.alpha, p.beta, p.mu);
    let (theta, gamma, epsilon) = (p.theta, p.gamma, p.epsilon);
    Matrix3::new(
        -theta / (beta * epsilon),
        -(alpha * epsilon - epsilon + gamma * theta) / (beta * epsilon),
        alpha / beta,
        -1.0 / epsilon,
        -gamma / epsilon,
        0.0,
        -1.0 / epsilon,
        (epsilon - gamma * mu) / (epsilon * mu),
        -1.0 / mu,
    )
}

/// Closed-form cubic (in `tau`) equal to
/// `det(surplus^-1 + tau * deficit) * (-beta epsilon mu)`.
///
/// Its strict positivity for all `tau >= 0` certifies that the regime
/// product has no negative real eigenvalue. The constant term is exactly 1
/// and the leading coefficient is `beta^2 epsilon^2 mu^2`.
pub fn pencil_cubic(p: &ModelParams) -> CubicCoeffs {
    let (alpha, beta, mu) = (p.alpha, p.beta, p.mu);
    let (delta, theta) = (p.delta, p.theta);
    let (gamma, epsilon) = (p.gamma, p.epsilon);

    let (b2, m2, g2, e2) = (beta * beta, mu * mu, gamma * gamma, epsilon * epsilon);

    let c3 = b2 * e2 * m2;
    let c2 = b2 * e2 + b2 * g2 * m2 - 2.0 * beta * epsilon * m2
        + delta * m2 * theta
        + alpha * beta * epsilon * m2
        + beta * delta * gamma * m2
        - alpha * delta * m2 * theta
        + beta * gamma * m2 * theta
        - alpha * beta * delta * epsilon * mu
        - alpha * beta * delta * gamma * m2;
    let c1 = m2 - alpha * m2 + b2 * g2 - 2.0 * beta * epsilon
        + delta * theta
        + beta * delta * gamma
        + alpha * delta * mu
        + beta * gamma * theta
        - alpha * mu * theta
        - alpha * beta * gamma * mu;
    CubicCoeffs::new(c3, c2, c1, 1.0)
}

/// One corollary of the sufficient stability conditions.
///
/// `applicable` records whether the corollary's hypothesis on
/// `(alpha, delta, mu, epsilon)` holds; `satisfied` whether its gain
/// inequality holds at the given `gamma` (vacuously true for the
/// all-gains corollary at `alpha = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryOutcome {
    pub id: u8,
    pub applicable: bool,
    pub satisfied: bool,
}

/// Evaluates the full corollary family at the given parameters.
///
/// The two existence-style corollaries — stability for all sufficiently
/// large `gamma` (id 1) and, when `alpha mu <= delta`, for all sufficiently
/// small `epsilon` (id 5) — are reported as satisfied when the corresponding
/// explicit condition holds at the supplied `(gamma, epsilon)`.
pub fn corollary_report(p: &ModelParams) -> Vec<CorollaryOutcome> {
    let (alpha, beta, mu) = (p.alpha, p.beta, p.mu);
    let (delta, epsilon, gamma) = (p.delta, p.epsilon, p.gamma);

    let gap = alpha * mu - delta;
    // Split point in epsilon between the ratio-form and sqrt-form conditions.
    let eps_split = gap * gap * mu / ((2.0 - alpha) * mu * beta + alpha * delta * beta);
    let sqrt_bound = (((2.0 - alpha) * epsilon * mu + alpha * epsilon * delta) / (beta * mu)).sqrt();

    let mut out = Vec::with_capacity(12);
    let mut push = |id: u8, applicable: bool, satisfied: bool| {
        out.push(CorollaryOutcome {
            id,
            applicable,
            satisfied,
        })
    };

    // Stable for all sufficiently large gamma; holds at this gamma when
    // either sufficient condition does.
    push(
        1,
        true,
        condition_i(p).satisfied || condition_ii(p).satisfied,
    );
    push(7, gap <= 0.0, gamma > sqrt_bound);
    // Stable for all sufficiently small epsilon under the same hypothesis,
    // evaluated at the given epsilon.
    push(5, gap <= 0.0, gamma > sqrt_bound);
    push(8, gap > 0.0 && epsilon <= eps_split, gamma > gap / beta);
    push(9, gap > 0.0 && epsilon > eps_split, gamma > sqrt_bound);
    push(
        2,
        gap >= 0.0,
        gamma > (gap + (gap * gap + 8.0 * beta * epsilon).sqrt()) / (2.0 * beta),
    );
    push(
        11,
        mu > delta,
        gamma > (gap + (gap * gap + 4.0 * alpha * mu * mu).sqrt()) / (2.0 * beta),
    );
    // alpha = 0: stable for all positive gains.
    push(12, alpha == 0.0, true);

    let no_customer_abandon = delta == 0.0;
    let eps_split0 = alpha * alpha * mu * mu / ((2.0 - alpha) * beta);
    push(
        3,
        no_customer_abandon && alpha > 0.0 && epsilon <= eps_split0,
        gamma > alpha * mu / beta,
    );
    push(
        4,
        no_customer_abandon && alpha > 0.0 && epsilon > eps_split0,
        gamma > ((2.0 - alpha) * epsilon / beta).sqrt(),
    );
    push(
        6,
        no_customer_abandon,
        gamma > (alpha * mu + (alpha * alpha * mu * mu + 8.0 * beta * epsilon).sqrt()) / (2.0 * beta),
    );
    push(
        10,
        no_customer_abandon,
        gamma > (alpha + (alpha * alpha + 4.0 * alpha).sqrt()) * mu / (2.0 * beta),
    );
    out
}

/// Full stability report for one parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// Hurwitz-ness of the surplus regime (true for every valid parameter set).
    pub surplus_hurwitz: bool,
    /// Hurwitz-ness of the deficit regime, by Routh–Hurwitz.
    pub deficit_hurwitz: bool,
    pub condition_i: GainCondition,
    pub condition_ii: GainCondition,
    pub cqlf: CqlfVerdict,
    pub corollaries: Vec<CorollaryOutcome>,
}

impl StabilityReport {
    pub fn evaluate(p: &ModelParams) -> Self {
        let pair = SwitchedPair::from_params(p);
        StabilityReport {
            surplus_hurwitz: characteristic_cubic(&pair.surplus)
                .is_hurwitz()
                .unwrap_or(false),
            deficit_hurwitz: characteristic_cubic(&pair.deficit)
                .is_hurwitz()
                .unwrap_or(false),
            condition_i: condition_i(p),
            condition_ii: condition_ii(p),
            cqlf: cqlf_exists(&pair),
            corollaries: corollary_report(p),
        }
    }

    /// True when either sufficient gain condition holds.
    pub fn locally_stable(&self) -> bool {
        self.condition_i.satisfied || self.condition_ii.satisfied
    }
}
