//! Scheme selection.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExplicitScheme {
    Muscl,
    MusclMod,
    Mprkc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImplicitScheme {
    Trapezoidal,
    /// Implicit Euler with piecewise constant data (first order).
    ImplicitEulerPcw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coupling {
    FullyExplicit,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlopeMethod {
    Central,
    Forward,
    LeastSquares,
    /// Exact derivatives on cut, transition and implicit-interior cells.
    Analytic,
}

/// Slope limiter for the explicit MUSCL fluxes. Only `Minmod` for the TVD check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Limiter {
    #[default]
    None,
    Minmod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub explicit: ExplicitScheme,
    pub implicit: ImplicitScheme,
    pub coupling: Coupling,
    /// λ in 1D, ν in 2D.
    pub cfl: f64,
    /// (u, v); v is ignored in 1D.
    pub velocity: (f64, f64),
    pub slopes: SlopeMethod,
    /// Extra cell layers added to the implicit core.
    pub extra_layers: usize,
    pub limiter: Limiter,
}

impl SchemeSpec {
    pub fn mixed(explicit: ExplicitScheme) -> Self {
        SchemeSpec {
            explicit,
            implicit: ImplicitScheme::Trapezoidal,
            coupling: Coupling::Mixed,
            cfl: 0.8,
            velocity: (1.0, 0.0),
            slopes: SlopeMethod::LeastSquares,
            extra_layers: 0,
            limiter: Limiter::None,
        }
    }

    pub fn explicit_only(explicit: ExplicitScheme) -> Self {
        SchemeSpec { coupling: Coupling::FullyExplicit, ..SchemeSpec::mixed(explicit) }
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_velocity(mut self, u: f64, v: f64) -> Self {
        self.velocity = (u, v);
        self
    }

    pub fn with_slopes(mut self, slopes: SlopeMethod) -> Self {
        self.slopes = slopes;
        self
    }

    pub fn with_implicit(mut self, implicit: ImplicitScheme) -> Self {
        self.implicit = implicit;
        self
    }

    pub fn with_extra_layers(mut self, n: usize) -> Self {
        self.extra_layers = n;
        self
    }

    pub fn with_limiter(mut self, limiter: Limiter) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::param(format!("cfl {} outside (0, 1]", self.cfl)));
        }
        if !self.velocity.0.is_finite() || !self.velocity.1.is_finite() {
            return Err(Error::param("velocity must be finite"));
        }
        Ok(())
    }

    pub fn is_mixed(&self) -> bool {
        self.coupling == Coupling::Mixed
    }

    /// Radius of the implicit core around the cut cells.
    pub fn core_radius(&self) -> usize {
        if !self.is_mixed() {
            return 0;
        }
        let base = if self.explicit == ExplicitScheme::Mprkc { 2 } else { 0 };
        base + self.extra_layers
    }

    /// Short label such as `MUSCL-Trap` or `MPRKC`.
    pub fn label(&self) -> String {
        let mut s = self.explicit.to_string();
        if self.is_mixed() {
            s.push('-');
            s.push_str(match self.implicit {
                ImplicitScheme::Trapezoidal => "Trap",
                ImplicitScheme::ImplicitEulerPcw => "IE",
            });
        }
        s
    }
}

macro_rules! str_enum {
    ($t:ty, $( $v:path => [$canon:literal $(, $alias:literal)*] ),+ $(,)?) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $( $v => $canon ),+ })
            }
        }
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                let k = s.trim().to_ascii_lowercase();
                $( if k == $canon.to_ascii_lowercase() $(|| k == $alias)* { return Ok($v); } )+
                Err(Error::param(format!("unknown {}: {s}", stringify!($t))))
            }
        }
    };
}

str_enum!(ExplicitScheme,
    ExplicitScheme::Muscl => ["MUSCL"],
    ExplicitScheme::MusclMod => ["MUSCLmod", "musclmod-trap", "mod"],
    ExplicitScheme::Mprkc => ["MPRKC"],
);
str_enum!(ImplicitScheme,
    ImplicitScheme::Trapezoidal => ["trap", "trapezoidal"],
    ImplicitScheme::ImplicitEulerPcw => ["ie", "euler", "implicit-euler"],
);
str_enum!(Coupling,
    Coupling::FullyExplicit => ["explicit", "fully-explicit"],
    Coupling::Mixed => ["mixed"],
);
str_enum!(SlopeMethod,
    SlopeMethod::Central => ["central"],
    SlopeMethod::Forward => ["forward"],
    SlopeMethod::LeastSquares => ["ls", "least-squares"],
    SlopeMethod::Analytic => ["analytic", "ana"],
);
str_enum!(Limiter,
    Limiter::None => ["none"],
    Limiter::Minmod => ["minmod"],
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_range() {
        assert!(SchemeSpec::mixed(ExplicitScheme::Muscl).with_cfl(1.0).validate().is_ok());
        assert!(SchemeSpec::mixed(ExplicitScheme::Muscl).with_cfl(0.0).validate().is_err());
        assert!(SchemeSpec::mixed(ExplicitScheme::Muscl).with_cfl(1.01).validate().is_err());
        let s = SchemeSpec::mixed(ExplicitScheme::Muscl).with_velocity(f64::INFINITY, 0.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn core_radius_by_variant() {
        assert_eq!(SchemeSpec::mixed(ExplicitScheme::Muscl).core_radius(), 0);
        assert_eq!(SchemeSpec::mixed(ExplicitScheme::Mprkc).core_radius(), 2);
        assert_eq!(SchemeSpec::mixed(ExplicitScheme::MusclMod).with_extra_layers(2).core_radius(), 2);
    }

    #[test]
    fn parse_round_trip() {
        for e in [ExplicitScheme::Muscl, ExplicitScheme::MusclMod, ExplicitScheme::Mprkc] {
            assert_eq!(e.to_string().parse::<ExplicitScheme>().unwrap(), e);
        }
        for s in [SlopeMethod::Central, SlopeMethod::Forward, SlopeMethod::LeastSquares, SlopeMethod::Analytic] {
            assert_eq!(s.to_string().parse::<SlopeMethod>().unwrap(), s);
        }
        assert_eq!("ls".parse::<SlopeMethod>().unwrap(), SlopeMethod::LeastSquares);
        assert!("bogus".parse::<ImplicitScheme>().is_err());
        assert_eq!(SchemeSpec::mixed(ExplicitScheme::Mprkc).label(), "MPRKC-Trap");
    }
}
