//! Cartesian parameter sweeps over dotted configuration keys.

use rayon::prelude::*;

use crate::commands::{currents_values, limits_values, CliError};
use crate::config::{ConfigError, RunConfig, SweepAnalysis};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<f64>,
}

/// Parses `key=start:stop:count` into `count` evenly spaced values.
pub fn parse_axis(text: &str) -> Result<Axis, ConfigError> {
    let field = "sweep.axes";
    let (key, range) = text.split_once('=').ok_or_else(|| {
        ConfigError::new(field, format!("`{text}`: expected key=start:stop:count"))
    })?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(ConfigError::new(field, format!("`{text}`: empty key")));
    }
    let parts: Vec<&str> = range.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(ConfigError::new(
            field,
            format!("`{text}`: expected key=start:stop:count"),
        ));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| {
                ConfigError::new(field, format!("`{text}`: `{s}` is not a finite number"))
            })
    };
    let (start, stop) = (num(parts[0])?, num(parts[1])?);
    let count: usize = parts[2].parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        ConfigError::new(field, format!("`{text}`: count must be an integer >= 1"))
    })?;
    let values = if count == 1 {
        vec![start]
    } else {
        (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect()
    };
    Ok(Axis {
        key: key.to_string(),
        values,
    })
}

/// Sets a dotted key in a TOML tree, creating missing tables. Integer
/// fields accept only integral values.
fn set_key(root: &mut toml::Value, key: &str, x: f64) -> Result<(), ConfigError> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for p in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| ConfigError::new(key, "not a table path"))?;
        node = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| ConfigError::new(key, "not a table path"))?;
    let last = parts[parts.len() - 1].to_string();
    let value = match table.get(&last) {
        Some(toml::Value::Integer(_)) => {
            if x.fract() != 0.0 {
                return Err(ConfigError::new(key, format!("integer field, got {x}")));
            }
            toml::Value::Integer(x as i64)
        }
        _ => toml::Value::Float(x),
    };
    table.insert(last, value);
    Ok(())
}

/// Every tuple of the axes in row-major order, outermost axis first.
fn tuples(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|t| {
                axis.values.iter().map(move |&v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

/// Long-format table: one row per tuple and output quantity.
pub fn sweep(
    cfg: &RunConfig,
    axes: &[Axis],
    analysis: SweepAnalysis,
    jobs: Option<usize>,
) -> Result<Table, CliError> {
    if axes.is_empty() {
        return Err(ConfigError::new("sweep.axes", "at least one axis is required").into());
    }
    let base = cfg.to_value();
    let configs: Vec<RunConfig> = tuples(axes)
        .into_iter()
        .map(|t| {
            let mut v = base.clone();
            for (axis, &x) in axes.iter().zip(&t) {
                set_key(&mut v, &axis.key, x)?;
            }
            RunConfig::from_value(v).map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;
    let run = |c: &RunConfig| -> Result<Vec<(&'static str, Cell)>, CliError> {
        let s = c.scenario()?;
        match analysis {
            SweepAnalysis::Limits => limits_values(c, &s),
            SweepAnalysis::Currents => currents_values(c, &s),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| ConfigError::new("--jobs", e.to_string()))?;
    let results: Vec<Result<Vec<(&'static str, Cell)>, CliError>> =
        pool.install(|| configs.par_iter().map(run).collect());

    let mut columns = vec!["index"];
    columns.extend(axes.iter().map(|a| a.key.as_str()));
    columns.extend(["quantity", "value"]);
    let mut t = Table::new(&columns);
    for (i, (tuple, res)) in tuples(axes).into_iter().zip(results).enumerate() {
        for (name, value) in res? {
            let mut row = vec![Cell::Int(i as i64)];
            row.extend(tuple.iter().map(|&x| Cell::Num(x)));
            row.push(name.into());
            row.push(value);
            t.push(row);
        }
    }
    t.meta(
        "analysis",
        match analysis {
            SweepAnalysis::Limits => "limits",
            SweepAnalysis::Currents => "currents",
        },
    );
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_syntax() {
        let a = parse_axis("drive.omega_d=0.9:1.0:3").unwrap();
        assert_eq!(a.key, "drive.omega_d");
        assert_eq!(a.values, vec![0.9, 0.95, 1.0]);
        assert_eq!(
            parse_axis("system.gamma=0.1:0.2:1").unwrap().values,
            vec![0.1]
        );
        for bad in [
            "gamma",
            "x=1:2",
            "x=1:2:0",
            "x=a:2:3",
            "=1:2:3",
            "x..y=1:2:2",
        ] {
            assert!(parse_axis(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn tuples_are_row_major() {
        let axes = [
            Axis {
                key: "a".into(),
                values: vec![1.0, 2.0],
            },
            Axis {
                key: "b".into(),
                values: vec![10.0, 20.0, 30.0],
            },
        ];
        let t = tuples(&axes);
        assert_eq!(t.len(), 6);
        assert_eq!(t[1], vec![1.0, 20.0]);
        assert_eq!(t[3], vec![2.0, 10.0]);
    }

    #[test]
    fn integer_keys_reject_fractions() {
        let cfg = crate::presets::preset("sideband").unwrap();
        let mut v = cfg.to_value();
        assert!(set_key(&mut v, "limits.k", 6.0).is_ok());
        assert!(set_key(&mut v, "limits.k", 6.5).is_err());
        assert!(set_key(&mut v, "drive.omega_d", 0.99).is_ok());
        let back = RunConfig::from_value(v).unwrap();
        assert_eq!(back.limits.k, 6);
        assert_eq!(back.drive.omega_d, Some(0.99));
    }

    #[test]
    fn unknown_sweep_key_is_a_config_error() {
        let cfg = crate::presets::preset("sideband").unwrap();
        let axes = [parse_axis("system.gama=0.1:0.2:2").unwrap()];
        let err = sweep(&cfg, &axes, SweepAnalysis::Limits, Some(1)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
