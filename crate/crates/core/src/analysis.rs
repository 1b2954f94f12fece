//! Reference solutions for the two model films and the regime heuristic.
//!
//! Parabolic disk (`f = |x|² - ½`, field along `e1`): `F = -2H x1` and, while
//! no obstacle is touched, `u = -(H/4) x1 (1 - |x|²)`, which first reaches
//! `±½` at `(∓1/√3, 0)` when `H = 3√3`.
//!
//! Saddle disk (field along `-e2`): `F = H(4r² - 1)` and `u = H ξ(r)` with
//! `ξ'' + ξ'/r = 1 - 4r²` off the coincidence sets and `|ξ| ≤ 1/(2H)`. The
//! general solution is `ξ = ¼r²(1 - r²) + c1 log r + c2`.

use serde::Serialize;

use crate::error::{Error, Result};

/// `3√3`, the first field at which the parabolic disk touches an obstacle.
pub fn example1_critical_field() -> f64 {
    3.0 * 3f64.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1Oracle {
    pub strength: f64,
    /// The closed form is valid (no contact, or first contact).
    pub closed_form: bool,
    /// `(point, sign)` of the contact points; `+1` for the upper obstacle.
    pub contact_points: Vec<((f64, f64), i8)>,
    /// `max |u|` of the closed form, when valid.
    pub max_abs: Option<f64>,
}

impl Example1Oracle {
    pub fn new(strength: f64) -> Result<Self> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "field strength must be positive, got {strength}"
            )));
        }
        let hc = example1_critical_field();
        let closed_form = strength <= hc * (1.0 + 1e-12);
        let at_contact = (strength - hc).abs() <= 1e-12 * hc;
        let c = 1.0 / 3f64.sqrt();
        Ok(Self {
            strength,
            closed_form,
            contact_points: if at_contact {
                vec![((-c, 0.0), 1), ((c, 0.0), -1)]
            } else {
                Vec::new()
            },
            // max of r(1 - r²) on [0, 1] is 2/(3√3)
            max_abs: closed_form.then(|| strength / 4.0 * 2.0 / (3.0 * 3f64.sqrt())),
        })
    }

    /// Closed-form potential, or `None` beyond the critical field.
    pub fn potential(&self, x: f64, y: f64) -> Option<f64> {
        self.closed_form
            .then(|| -0.25 * self.strength * x * (1.0 - x * x - y * y))
    }
}

/// Oddness in `x1` of a solution beyond the closed-form range: `u(-x1, x2) =
/// -u(x1, x2)`, so `S+` and `S-` are mirror images.
pub fn example1_symmetry_defect(u: impl Fn(f64, f64) -> f64, points: &[(f64, f64)]) -> f64 {
    points
        .iter()
        .map(|&(x, y)| (u(x, y) + u(-x, y)).abs())
        .fold(0.0, f64::max)
}

/// State of a radial segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentState {
    /// `ξ = ¼r²(1 - r²) + c1 log r + c2`.
    Free {
        c1: f64,
        c2: f64,
    },
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub r0: f64,
    pub r1: f64,
    pub state: SegmentState,
}

/// Which of the successive regimes a field strength falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialRegime {
    /// `H < 8`: no contact.
    Subcritical,
    /// `H = 8`: contact on the circle `r = 1/√2`.
    FirstContact,
    /// `8 < H < 16`: `S+` is an annulus with fixed inner radius.
    Annulus,
    /// `H = 16`: the center touches the lower obstacle.
    LowerContact,
    /// `H > 16`: `S-` a central disk and `S+` an annulus.
    Both,
}

/// Piecewise radial profile `ξ` of the saddle disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSolution {
    pub strength: f64,
    pub regime: RadialRegime,
    pub segments: Vec<Segment>,
    /// Outer radius `R` of `S+`.
    pub outer: Option<f64>,
    /// Inner radius `ρ+` of `S+`.
    pub plus_inner: Option<f64>,
    /// Radius `ρ-` of the disk `S-`.
    pub minus_outer: Option<f64>,
}

fn base(r: f64) -> f64 {
    0.25 * r * r * (1.0 - r * r)
}

fn base_d(r: f64) -> f64 {
    0.5 * r - r * r * r
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, what: &str) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoBracket(format!("{what}: f({lo}) = {flo}, f({hi}) = {fhi}")));
    }
    let neg_lo = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outer radius `R` of `S+`: where the free profile with `ξ(1) = 0` meets the
/// obstacle `m` tangentially.
fn outer_radius(m: f64) -> Result<f64> {
    let g = |r: f64| base(r) + r * r * (r * r - 0.5) * r.ln() - m;
    bisect(g, std::f64::consts::FRAC_1_SQRT_2, 1.0, "outer free boundary")
}

/// Radial profile at field strength `H`.
pub fn example2_radial_oracle(strength: f64) -> Result<RadialSolution> {
    if !(strength > 0.0 && strength.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "field strength must be positive, got {strength}"
        )));
    }
    let m = 0.5 / strength;
    let r_mid = std::f64::consts::FRAC_1_SQRT_2;
    let free = |c1, c2| SegmentState::Free { c1, c2 };
    if strength <= 8.0 {
        return Ok(RadialSolution {
            strength,
            regime: if strength < 8.0 {
                RadialRegime::Subcritical
            } else {
                RadialRegime::FirstContact
            },
            segments: vec![Segment {
                r0: 0.0,
                r1: 1.0,
                state: free(0.0, 0.0),
            }],
            outer: (strength == 8.0).then_some(r_mid),
            plus_inner: (strength == 8.0).then_some(r_mid),
            minus_outer: None,
        });
    }
    let big_r = outer_radius(m)?;
    let outer_seg = Segment {
        r0: big_r,
        r1: 1.0,
        state: free(big_r * big_r * (big_r * big_r - 0.5), 0.0),
    };
    if strength <= 16.0 {
        return Ok(RadialSolution {
            strength,
            regime: if strength < 16.0 {
                RadialRegime::Annulus
            } else {
                RadialRegime::LowerContact
            },
            segments: vec![
                Segment {
                    r0: 0.0,
                    r1: r_mid,
                    state: free(0.0, m - 1.0 / 16.0),
                },
                Segment {
                    r0: r_mid,
                    r1: big_r,
                    state: SegmentState::Upper,
                },
                outer_seg,
            ],
            outer: Some(big_r),
            plus_inner: Some(r_mid),
            minus_outer: (strength == 16.0).then_some(0.0),
        });
    }
    // s = ρ², with tangency at both ends forcing s+ = ½ - s- and c1 = -s- s+
    let jump = |sm: f64| {
        let sp = 0.5 - sm;
        let c1 = -sm * sp;
        0.25 * (sp - sp * sp) - 0.25 * (sm - sm * sm) + c1 * 0.5 * (sp / sm).ln() - 2.0 * m
    };
    let sm = bisect(jump, f64::MIN_POSITIVE, 0.25, "inner free boundaries")?;
    let sp = 0.5 - sm;
    let c1 = -sm * sp;
    let (rm, rp) = (sm.sqrt(), sp.sqrt());
    let c2 = -m - base(rm) - c1 * rm.ln();
    Ok(RadialSolution {
        strength,
        regime: RadialRegime::Both,
        segments: vec![
            Segment {
                r0: 0.0,
                r1: rm,
                state: SegmentState::Lower,
            },
            Segment {
                r0: rm,
                r1: rp,
                state: free(c1, c2),
            },
            Segment {
                r0: rp,
                r1: big_r,
                state: SegmentState::Upper,
            },
            outer_seg,
        ],
        outer: Some(big_r),
        plus_inner: Some(rp),
        minus_outer: Some(rm),
    })
}

impl RadialSolution {
    /// Obstacle height `1/(2H)` for `ξ`.
    pub fn bound(&self) -> f64 {
        0.5 / self.strength
    }

    fn segment_at(&self, r: f64) -> &Segment {
        self.segments
            .iter()
            .find(|s| r <= s.r1)
            .unwrap_or_else(|| self.segments.last().expect("at least one segment"))
    }

    fn eval_state(&self, state: SegmentState, r: f64) -> (f64, f64) {
        match state {
            SegmentState::Free { c1, c2 } => {
                let (lg, dlg) = if c1 == 0.0 { (0.0, 0.0) } else { (c1 * r.ln(), c1 / r) };
                (base(r) + lg + c2, base_d(r) + dlg)
            }
            SegmentState::Upper => (self.bound(), 0.0),
            SegmentState::Lower => (-self.bound(), 0.0),
        }
    }

    /// `ξ(r)` for `0 ≤ r ≤ 1`.
    pub fn xi(&self, r: f64) -> f64 {
        self.eval_state(self.segment_at(r).state, r).0
    }

    /// The potential `u = H ξ` at a point.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        self.strength * self.xi(x.hypot(y).min(1.0))
    }

    /// Worst mismatch of value or slope across the breakpoints.
    pub fn continuity_defect(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| {
                let r = w[0].r1;
                let (v0, d0) = self.eval_state(w[0].state, r);
                let (v1, d1) = self.eval_state(w[1].state, r);
                (v0 - v1).abs().max((d0 - d1).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Inputs of the thin-film versus bulk-lattice comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeParams {
    pub kappa: f64,
    pub epsilon: f64,
    pub h1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Bulk,
    ThinFilm,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    /// `ε H1²`.
    pub thin_film_energy: f64,
    /// `H1 log(κ² ε / H1)`, absent when the logarithm's argument is at most 1.
    pub bulk_lattice_energy: Option<f64>,
    pub verdict: Verdict,
}

/// Compares the energy scales of in-plane vortices filling the film and of a
/// bulk vortex lattice. `Bulk` when the bulk scale is below half the film
/// scale, `ThinFilm` when above twice it.
pub fn regime_check(p: RegimeParams) -> Result<RegimeReport> {
    if !(p.kappa > 1.0 && p.epsilon > 0.0 && p.h1 > 0.0)
        || !(p.kappa.is_finite() && p.epsilon.is_finite() && p.h1.is_finite())
    {
        return Err(Error::InvalidParameter(format!(
            "need kappa > 1 and positive epsilon, H1; got {p:?}"
        )));
    }
    let thin = p.epsilon * p.h1 * p.h1;
    let arg = p.kappa * p.kappa * p.epsilon / p.h1;
    if arg <= 1.0 {
        return Ok(RegimeReport {
            thin_film_energy: thin,
            bulk_lattice_energy: None,
            verdict: Verdict::ThinFilm,
        });
    }
    let bulk = p.h1 * arg.ln();
    let ratio = bulk / thin;
    let verdict = if ratio < 0.5 {
        Verdict::Bulk
    } else if ratio > 2.0 {
        Verdict::ThinFilm
    } else {
        Verdict::Ambiguous
    };
    Ok(RegimeReport {
        thin_film_energy: thin,
        bulk_lattice_energy: Some(bulk),
        verdict,
    })
}
