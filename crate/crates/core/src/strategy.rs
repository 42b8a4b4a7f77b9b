//! Named, runtime-selectable θ finders and colorings.

use std::collections::BTreeMap;

use crate::coloring::{self, Coloring};
use crate::error::Error;
use crate::lll;
use crate::sequences::LacunarySequence;
use crate::survivor::{self, SurvivorConfig, ThetaCertificate};
use crate::theta_oracle;

pub trait Named: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
}

/// Produces a certified multiplier for the first `n` terms of a sequence.
pub trait ThetaStrategy: Named {
    fn find(&self, seq: &LacunarySequence, n: usize) -> Result<ThetaCertificate, Error>;
}

fn prefix(seq: &LacunarySequence, n: usize) -> Result<&[u64], Error> {
    seq.terms()
        .get(..n)
        .ok_or(Error::Survivor(survivor::SurvivorError::TruncationTooLong { n, len: seq.len() }))
}

pub struct Exact;

impl Named for Exact {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn describe(&self) -> &'static str {
        "exhaustive maximizer over tent-map breakpoints"
    }
}

impl ThetaStrategy for Exact {
    fn find(&self, seq: &LacunarySequence, n: usize) -> Result<ThetaCertificate, Error> {
        let terms = prefix(seq, n)?;
        let (theta, value) = theta_oracle::optimal_theta(terms)?;
        Ok(ThetaCertificate::from_theta(theta, terms, value)?)
    }
}

pub struct Grid {
    pub resolution: u64,
}

impl Named for Grid {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn describe(&self) -> &'static str {
        "best point of a uniform grid"
    }
}

impl ThetaStrategy for Grid {
    fn find(&self, seq: &LacunarySequence, n: usize) -> Result<ThetaCertificate, Error> {
        let terms = prefix(seq, n)?;
        let (theta, value) = theta_oracle::grid_refine(terms, self.resolution)?;
        Ok(ThetaCertificate::from_theta(theta, terms, value)?)
    }
}

pub struct Survivor {
    pub config: SurvivorConfig,
}

impl Named for Survivor {
    fn name(&self) -> &'static str {
        "survivor"
    }

    fn describe(&self) -> &'static str {
        "dyadic survivor set with the product measure bound"
    }
}

impl ThetaStrategy for Survivor {
    fn find(&self, seq: &LacunarySequence, n: usize) -> Result<ThetaCertificate, Error> {
        let params = lll::make_default_params((seq.doubling_span() as u64).max(4))?;
        let state = survivor::run(seq, &params, n, &self.config)?;
        Ok(survivor::extract_theta(&state)?)
    }
}

pub struct Warmup;

impl Named for Warmup {
    fn name(&self) -> &'static str {
        "warmup"
    }

    fn describe(&self) -> &'static str {
        "nested middle halves, ratio above 4 only"
    }
}

impl ThetaStrategy for Warmup {
    fn find(&self, seq: &LacunarySequence, n: usize) -> Result<ThetaCertificate, Error> {
        Ok(survivor::warmup_nested(seq, n)?)
    }
}

/// Colors a window of `G(S)` for the terms of a sequence.
pub trait ColoringStrategy: Named {
    fn color(&self, seq: &LacunarySequence, window: (i64, i64)) -> Result<Coloring, Error>;
}

/// Bohr-class coloring from a survivor certificate over the whole sequence.
pub struct Bohr {
    pub config: SurvivorConfig,
}

impl Named for Bohr {
    fn name(&self) -> &'static str {
        "bohr"
    }

    fn describe(&self) -> &'static str {
        "ceil(1/delta) cells of the circle, pulled back by n -> n theta"
    }
}

impl ColoringStrategy for Bohr {
    fn color(&self, seq: &LacunarySequence, window: (i64, i64)) -> Result<Coloring, Error> {
        let cert = Survivor { config: self.config }.find(seq, seq.len())?;
        Ok(coloring::color_from_certificate(&cert, window)?)
    }
}

pub struct Quarters;

impl Named for Quarters {
    fn name(&self) -> &'static str {
        "quarters"
    }

    fn describe(&self) -> &'static str {
        "quarter indices of n theta_r over K interleaved subsequences"
    }
}

impl ColoringStrategy for Quarters {
    fn color(&self, seq: &LacunarySequence, window: (i64, i64)) -> Result<Coloring, Error> {
        Ok(coloring::warmup_coloring(seq, window)?.coloring)
    }
}

pub struct Registry<T: ?Sized> {
    entries: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Registry {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn register(&mut self, s: Box<T>) {
        self.entries.insert(s.name(), s);
    }

    pub fn get(&self, name: &str) -> Result<&T, Error> {
        self.entries
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Registry<dyn ThetaStrategy> {
    pub fn with_defaults(grid_resolution: u64, config: SurvivorConfig) -> Self {
        let mut r = Self::default();
        r.register(Box::new(Exact));
        r.register(Box::new(Grid {
            resolution: grid_resolution,
        }));
        r.register(Box::new(Survivor { config }));
        r.register(Box::new(Warmup));
        r
    }
}

impl Registry<dyn ColoringStrategy> {
    pub fn with_defaults(config: SurvivorConfig) -> Self {
        let mut r = Self::default();
        r.register(Box::new(Bohr { config }));
        r.register(Box::new(Quarters));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{verify_proper, DistanceGraphWindow};
    use crate::rational::ratio;
    use crate::sequences::{generate_geometric, validate};

    #[test]
    fn theta_registry_lists_all() {
        let r = Registry::<dyn ThetaStrategy>::with_defaults(1000, SurvivorConfig::default());
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["exact", "grid", "survivor", "warmup"]);
        assert!(matches!(r.get("nope"), Err(Error::UnknownStrategy(_))));
    }

    #[test]
    fn strategies_agree_on_certificates() {
        let seq = validate(&[1, 5, 26, 131], Some(ratio(4, 1))).unwrap();
        let r = Registry::<dyn ThetaStrategy>::with_defaults(4096, SurvivorConfig::default());
        let exact = r.get("exact").unwrap().find(&seq, 4).unwrap();
        for name in ["grid", "survivor", "warmup"] {
            let cert = r.get(name).unwrap().find(&seq, 4).unwrap();
            assert!(cert.reverify(), "{name}");
            assert!(cert.value <= exact.value, "{name}");
        }
    }

    #[test]
    fn coloring_registry_produces_proper_colorings() {
        let seq = generate_geometric(&ratio(1, 2), 10, 1).unwrap();
        let r = Registry::<dyn ColoringStrategy>::with_defaults(SurvivorConfig::default());
        let g = DistanceGraphWindow::new(seq.terms(), -500, 500).unwrap();
        for name in r.names() {
            let c = r.get(name).unwrap().color(&seq, (-500, 500)).unwrap();
            assert!(verify_proper(&c, &g).unwrap().is_proper(), "{name}");
        }
    }
}
