use crate::failure::Failure;
use clap::Args;
use mtm::moments::parse_proportion;
use mtm::{Family, Model, Scheme};
use std::io::Write;
use std::path::PathBuf;

/// Trimming scheme flags: repeated `--scheme a1,b1,a2,b2` and/or the
/// individual `--a1 .. --b2` proportions (missing ones default to 0).
#[derive(Args, Debug, Clone, Default)]
pub struct SchemeFlags {
    /// Trimming proportions `a1,b1,a2,b2`; fractions such as 1/30 are accepted. Repeatable.
    #[arg(long = "scheme", value_name = "A1,B1,A2,B2")]
    pub schemes: Vec<String>,
    /// Lower trimming proportion of the first moment.
    #[arg(long)]
    pub a1: Option<String>,
    /// Upper trimming proportion of the first moment.
    #[arg(long)]
    pub b1: Option<String>,
    /// Lower trimming proportion of the second moment.
    #[arg(long)]
    pub a2: Option<String>,
    /// Upper trimming proportion of the second moment.
    #[arg(long)]
    pub b2: Option<String>,
}

impl SchemeFlags {
    /// All schemes given on the command line, in order.
    pub fn resolve(&self) -> Result<Vec<Scheme>, Failure> {
        let mut out: Vec<Scheme> = self
            .schemes
            .iter()
            .map(|s| s.parse::<Scheme>())
            .collect::<Result<_, _>>()?;
        let parts = [&self.a1, &self.b1, &self.a2, &self.b2];
        if parts.iter().any(|p| p.is_some()) {
            let p = parts.map(|p| p.as_deref().map_or(Ok(0.0), parse_proportion));
            let [a1, b1, a2, b2] = p;
            out.push(Scheme::new(a1?, b1?, a2?, b2?)?);
        }
        Ok(out)
    }

    pub fn single(&self) -> Result<Scheme, Failure> {
        match self.resolve()?.as_slice() {
            [s] => Ok(*s),
            [] => Err(Failure::Validation(
                "no trimming scheme given; use --scheme a1,b1,a2,b2 or --a1/--b1/--a2/--b2".into(),
            )),
            _ => Err(Failure::Validation(
                "exactly one trimming scheme is required".into(),
            )),
        }
    }
}

/// Parses `v1,v2,...` or an inclusive range `start:stop:step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = |why: &str| Failure::Validation(format!("bad value list '{s}': {why}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(bad("ranges are start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step.is_nan() || step <= 0.0 || stop < start || !(start.is_finite() && stop.is_finite())
        {
            return Err(bad("need a positive step and start <= stop"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(bad("range has too many points"));
        }
        // snap to 12 decimals so 0.1:0.3:0.1 ends at 0.3, not 0.30000000000000004
        Ok((0..count)
            .map(|i| ((start + step * i as f64) * 1e12).round() / 1e12)
            .collect())
    } else {
        let values: Vec<f64> = s.split(',').map(num).collect::<Result<_, _>>()?;
        if values.is_empty() {
            return Err(bad("empty"));
        }
        Ok(values)
    }
}

/// Flags naming the first model parameter: `--theta` for the location-scale
/// families, `--beta` for Fréchet.
#[derive(Args, Debug, Clone)]
pub struct ModelFlags {
    /// Model family: normal, lognormal or frechet.
    #[arg(long)]
    pub model: Family,
    /// Location parameter (normal, lognormal): a value, a list or start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Tail parameter (Fréchet): a value, a list or start:stop:step.
    #[arg(long)]
    pub beta: Option<String>,
    /// Scale parameter: a value, a list or start:stop:step.
    #[arg(long)]
    pub sigma: String,
}

impl ModelFlags {
    /// The first-parameter grid and the scale grid.
    pub fn grids(&self) -> Result<(Vec<f64>, Vec<f64>), Failure> {
        let first = match (self.model, &self.theta, &self.beta) {
            (Family::Frechet, None, Some(b)) => b,
            (Family::Normal | Family::Lognormal, Some(t), None) => t,
            (Family::Frechet, _, _) => {
                return Err(Failure::Validation("the frechet model takes --beta".into()))
            }
            _ => {
                return Err(Failure::Validation(format!(
                    "the {} model takes --theta",
                    self.model
                )))
            }
        };
        Ok((parse_grid(first)?, parse_grid(&self.sigma)?))
    }

    pub fn single(&self) -> Result<Model, Failure> {
        let (first, sigma) = self.grids()?;
        match (first.as_slice(), sigma.as_slice()) {
            ([p], [s]) => Ok(Model::from_pair(self.model, [*p, *s])?),
            _ => Err(Failure::Validation(
                "this command takes single parameter values".into(),
            )),
        }
    }
}

/// Output destination: a file, or standard output when absent.
#[derive(Args, Debug, Clone, Default)]
pub struct OutputFlag {
    /// Write output to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl OutputFlag {
    /// Writes the complete output at once, so failures leave no partial file.
    pub fn emit(&self, bytes: &[u8]) -> Result<(), Failure> {
        match &self.output {
            Some(path) => std::fs::write(path, bytes)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

/// Label for a scheme in CSV output.
pub fn scheme_label(s: &Scheme) -> String {
    let [a1, b1, a2, b2] = s.proportions();
    format!("{a1},{b1},{a2},{b2}")
}

/// Warns when a proportion sits just below a whole number of observations,
/// since trimming counts are floored (30 × 0.0333 trims nothing).
pub fn warn_on_floor(scheme: &Scheme, n: usize) {
    for p in scheme.proportions() {
        let x = n as f64 * p;
        let frac = x - x.floor();
        if frac > 0.99 && frac < 1.0 - 1e-9 {
            eprintln!(
                "note: {n} x {p} = {x:.4} trims {} observation(s); write the proportion as a fraction (e.g. {}/{n}) to trim {}",
                x.floor(),
                x.ceil(),
                x.ceil()
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_inclusive() {
        assert_eq!(parse_grid("-25:25:5").unwrap().len(), 11);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_grid("1,2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn individual_proportions_default_to_zero() {
        let f = SchemeFlags {
            a1: Some("1/30".into()),
            b2: Some("1/30".into()),
            ..Default::default()
        };
        let s = f.single().unwrap();
        assert_eq!(s.proportions(), [1.0 / 30.0, 0.0, 0.0, 1.0 / 30.0]);
    }
}
