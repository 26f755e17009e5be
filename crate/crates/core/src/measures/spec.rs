use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Whether the ordering keeps the smallest (dissimilarity) or the largest
/// (similarity) aggregate score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Minimize,
    Maximize,
}

/// Identifier of a pairwise measure, without parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureId {
    D1,
    D2,
    D2Sq,
    DInf,
    Bray,
    Canberra,
    Chord,
    Cosine,
    Divergence,
    Goude,
    Soergel,
    Ware,
    Fms,
    Fds,
    Fmds,
    Cfs,
}

impl MeasureId {
    pub const ALL: [MeasureId; 16] = [
        MeasureId::D1,
        MeasureId::D2,
        MeasureId::D2Sq,
        MeasureId::DInf,
        MeasureId::Bray,
        MeasureId::Canberra,
        MeasureId::Chord,
        MeasureId::Cosine,
        MeasureId::Divergence,
        MeasureId::Goude,
        MeasureId::Soergel,
        MeasureId::Ware,
        MeasureId::Fms,
        MeasureId::Fds,
        MeasureId::Fmds,
        MeasureId::Cfs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::D1 => "d1",
            MeasureId::D2 => "d2",
            MeasureId::D2Sq => "d2sq",
            MeasureId::DInf => "dinf",
            MeasureId::Bray => "bray",
            MeasureId::Canberra => "canberra",
            MeasureId::Chord => "chord",
            MeasureId::Cosine => "cosine",
            MeasureId::Divergence => "divergence",
            MeasureId::Goude => "goude",
            MeasureId::Soergel => "soergel",
            MeasureId::Ware => "ware",
            MeasureId::Fms => "fms",
            MeasureId::Fds => "fds",
            MeasureId::Fmds => "fmds",
            MeasureId::Cfs => "cfs",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            MeasureId::Fms | MeasureId::Fds | MeasureId::Fmds | MeasureId::Cfs => {
                Orientation::Maximize
            }
            _ => Orientation::Minimize,
        }
    }

    /// The measure with its default parameters.
    pub fn default_spec(self) -> MeasureSpec {
        match self {
            MeasureId::D1 => MeasureSpec::D1,
            MeasureId::D2 => MeasureSpec::D2,
            MeasureId::D2Sq => MeasureSpec::D2Sq,
            MeasureId::DInf => MeasureSpec::DInf,
            MeasureId::Bray => MeasureSpec::Bray,
            MeasureId::Canberra => MeasureSpec::Canberra,
            MeasureId::Chord => MeasureSpec::Chord,
            MeasureId::Cosine => MeasureSpec::Cosine,
            MeasureId::Divergence => MeasureSpec::Divergence,
            MeasureId::Goude => MeasureSpec::Goude,
            MeasureId::Soergel => MeasureSpec::Soergel,
            MeasureId::Ware => MeasureSpec::Ware,
            MeasureId::Fms => MeasureSpec::Fms {
                k: MeasureSpec::DEFAULT_FMS_K,
            },
            MeasureId::Fds => MeasureSpec::Fds {
                k: MeasureSpec::DEFAULT_FDS_K,
            },
            MeasureId::Fmds => MeasureSpec::Fmds {
                k1: MeasureSpec::DEFAULT_FMS_K,
                k2: MeasureSpec::DEFAULT_FDS_K,
            },
            MeasureId::Cfs => MeasureSpec::Cfs {
                c: MeasureSpec::DEFAULT_CFS_C,
                t: MeasureSpec::DEFAULT_CFS_T,
            },
        }
    }

    /// Parameter names accepted after the `:` in a measure string.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            MeasureId::Fms | MeasureId::Fds => &["K"],
            MeasureId::Fmds => &["K1", "K2"],
            MeasureId::Cfs => &["C", "t"],
            _ => &[],
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        MeasureId::ALL
            .into_iter()
            .find(|id| id.name() == lower)
            .ok_or_else(|| Error::Config(format!("unknown measure id {s:?}")))
    }
}

/// A pairwise measure together with its parameters.
///
/// The textual form is `id` or `id:NAME=value,...`, e.g. `fms:K=1024` or
/// `cfs:C=150,t=4`. Omitted parameters take their defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasureSpec {
    D1,
    D2,
    D2Sq,
    DInf,
    Bray,
    Canberra,
    Chord,
    Cosine,
    Divergence,
    Goude,
    Soergel,
    Ware,
    Fms { k: f64 },
    Fds { k: f64 },
    Fmds { k1: f64, k2: f64 },
    Cfs { c: f64, t: f64 },
}

impl MeasureSpec {
    pub const DEFAULT_FMS_K: f64 = 1024.0;
    pub const DEFAULT_FDS_K: f64 = 4.0;
    pub const DEFAULT_CFS_C: f64 = 150.0;
    pub const DEFAULT_CFS_T: f64 = 4.0;

    pub fn id(&self) -> MeasureId {
        match self {
            MeasureSpec::D1 => MeasureId::D1,
            MeasureSpec::D2 => MeasureId::D2,
            MeasureSpec::D2Sq => MeasureId::D2Sq,
            MeasureSpec::DInf => MeasureId::DInf,
            MeasureSpec::Bray => MeasureId::Bray,
            MeasureSpec::Canberra => MeasureId::Canberra,
            MeasureSpec::Chord => MeasureId::Chord,
            MeasureSpec::Cosine => MeasureId::Cosine,
            MeasureSpec::Divergence => MeasureId::Divergence,
            MeasureSpec::Goude => MeasureId::Goude,
            MeasureSpec::Soergel => MeasureId::Soergel,
            MeasureSpec::Ware => MeasureId::Ware,
            MeasureSpec::Fms { .. } => MeasureId::Fms,
            MeasureSpec::Fds { .. } => MeasureId::Fds,
            MeasureSpec::Fmds { .. } => MeasureId::Fmds,
            MeasureSpec::Cfs { .. } => MeasureId::Cfs,
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.id().orientation()
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            MeasureSpec::Fms { k } | MeasureSpec::Fds { k } => vec![("K", k)],
            MeasureSpec::Fmds { k1, k2 } => vec![("K1", k1), ("K2", k2)],
            MeasureSpec::Cfs { c, t } => vec![("C", c), ("t", t)],
            _ => Vec::new(),
        }
    }

    /// Checks that every parameter is finite and strictly positive.
    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in self.params() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "{}: parameter {name} must be a positive finite number, got {v}",
                    self.id()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id().name())?;
        let params = self.params();
        for (i, (name, v)) in params.iter().enumerate() {
            let sep = if i == 0 { ':' } else { ',' };
            write!(f, "{sep}{name}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for MeasureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (id_part, param_part) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let id: MeasureId = id_part.parse()?;
        let mut spec = id.default_spec();
        let Some(param_part) = param_part else {
            return Ok(spec);
        };
        let allowed = id.param_names();
        let mut seen = Vec::new();
        for item in param_part.split(',').filter(|p| !p.trim().is_empty()) {
            let (name, value) = item.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{s:?}: malformed parameter {item:?} (expected NAME=value)"
                ))
            })?;
            let name = name.trim();
            let canonical = allowed
                .iter()
                .copied()
                .find(|a| a.eq_ignore_ascii_case(name))
                .ok_or_else(|| {
                    if allowed.is_empty() {
                        Error::Config(format!("{s:?}: measure {id} takes no parameters"))
                    } else {
                        Error::Config(format!(
                            "{s:?}: unknown parameter {name:?} for {id} (expected {})",
                            allowed.join(", ")
                        ))
                    }
                })?;
            if seen.contains(&canonical) {
                return Err(Error::Config(format!(
                    "{s:?}: parameter {canonical} given twice"
                )));
            }
            seen.push(canonical);
            let v: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{s:?}: parameter {canonical} is not a number: {value:?}"
                ))
            })?;
            match (&mut spec, canonical) {
                (MeasureSpec::Fms { k } | MeasureSpec::Fds { k }, "K") => *k = v,
                (MeasureSpec::Fmds { k1, .. }, "K1") => *k1 = v,
                (MeasureSpec::Fmds { k2, .. }, "K2") => *k2 = v,
                (MeasureSpec::Cfs { c, .. }, "C") => *c = v,
                (MeasureSpec::Cfs { t, .. }, "t") => *t = v,
                _ => unreachable!("parameter names come from param_names()"),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}
