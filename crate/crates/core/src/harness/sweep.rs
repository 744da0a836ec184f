use super::config::{Command, ExperimentConfig, Scheme, Sweep};
use super::csv::{format_number, Table};
use super::monte_carlo::{mc_bkic_residual, mc_orthogonal_rate, mc_traditional_sinr, McSetup};
use super::stats::McEstimate;
use crate::error::{param, Result};
use crate::rates::RatePoint;

/// One evaluated scheme at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// Rate in the configured log base.
    Analytic(f64),
    /// Monte Carlo estimate: dB for SINR and SNR schemes, the configured log
    /// base for rates.
    MonteCarlo(McEstimate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub cells: Vec<Cell>,
}

fn sweep_column(cfg: &ExperimentConfig) -> &'static str {
    match cfg.sweep {
        Sweep::BlockLen(_) => "T",
        _ => "p_x_db",
    }
}

/// Evaluates every requested scheme at every sweep point, in sweep order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    if cfg.command == Command::Validate {
        return Err(param("validate has no sweep"));
    }
    (0..cfg.sweep.len())
        .map(|i| {
            let params = cfg.params_at(i)?;
            let point = RatePoint::from_powers(params.p_x, params.p_z, params.sigma2, params.block_len)?;
            let setup = McSetup {
                params,
                zspec: cfg.zmod.spec(),
                fading: cfg.fading_spec(),
                trials: cfg.trials,
                seed: cfg.seed,
                point: i as u64,
            };
            let base = cfg.log_base;
            let cells = cfg
                .schemes
                .iter()
                .map(|s| {
                    Ok(match s {
                        Scheme::Naive => Cell::Analytic(base.from_bits(point.r_naive)),
                        Scheme::CU => Cell::Analytic(base.from_bits(point.c_u)),
                        Scheme::RT => Cell::Analytic(base.from_bits(point.r_t)),
                        Scheme::RBkic => Cell::Analytic(base.from_bits(point.r_bkic)),
                        Scheme::ROrth => Cell::Analytic(base.from_bits(point.r_orth)),
                        Scheme::Gap => Cell::Analytic(base.from_bits(point.gap)),
                        Scheme::McTraditionalSinr => Cell::MonteCarlo(mc_traditional_sinr(&setup)?),
                        Scheme::McBkicResidual => Cell::MonteCarlo(mc_bkic_residual(&setup)?),
                        Scheme::McOrthRate => {
                            let e = mc_orthogonal_rate(&setup)?;
                            Cell::MonteCarlo(McEstimate {
                                mean: base.from_bits(e.mean),
                                stderr: base.from_bits(e.stderr),
                                ..e
                            })
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let sweep_value = match &cfg.sweep {
                Sweep::PxDb(v) => v[i],
                Sweep::BlockLen(v) => v[i] as f64,
                Sweep::Single => cfg.px_db,
            };
            Ok(ResultRow { sweep_value, cells })
        })
        .collect()
}

/// Runs the sweep and lays it out as a CSV table.
pub fn run_table(cfg: &ExperimentConfig) -> Result<Table> {
    let rows = run_sweep(cfg)?;
    let mut columns = vec![sweep_column(cfg).to_string()];
    for s in &cfg.schemes {
        if s.is_monte_carlo() {
            for suffix in ["mean", "stderr", "trials"] {
                columns.push(format!("{}_{suffix}", s.name()));
            }
        } else {
            columns.push(s.name().to_string());
        }
    }
    let integer_sweep = matches!(cfg.sweep, Sweep::BlockLen(_));
    let rows = rows
        .into_iter()
        .map(|r| {
            let mut out =
                vec![if integer_sweep { (r.sweep_value as usize).to_string() } else { format_number(r.sweep_value) }];
            for c in r.cells {
                match c {
                    Cell::Analytic(v) => out.push(format_number(v)),
                    Cell::MonteCarlo(e) => {
                        out.push(format_number(e.mean));
                        out.push(format_number(e.stderr));
                        out.push(e.trials.to_string());
                    }
                }
            }
            out
        })
        .collect();
    Ok(Table { comments: cfg.comment_lines(), columns, rows })
}

/// Target power sweep at `Pz = Px`, `T = 100` by default.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<Table> {
    if cfg.command != Command::Fig3 {
        return Err(param("configuration was not resolved for fig3"));
    }
    run_table(cfg)
}

/// Block length sweep at `Px = Pz = 20 dB` by default.
pub fn run_fig4(cfg: &ExperimentConfig) -> Result<Table> {
    if cfg.command != Command::Fig4 {
        return Err(param("configuration was not resolved for fig4"));
    }
    run_table(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ConfigMap;

    #[test]
    fn fig3_row_at_20_db() {
        let cfg = ExperimentConfig::resolve(Command::Fig3, &ConfigMap::new()).unwrap();
        let t = run_fig3(&cfg).unwrap();
        assert_eq!(t.columns, vec!["p_x_db", "r_t", "r_bkic", "c_u"]);
        assert_eq!(t.rows.len(), 30);
        assert_eq!(t.value(19, "p_x_db"), Some(20.0));
        assert!((t.value(19, "r_t").unwrap() - 5.658).abs() < 1e-3);
        assert!((t.value(19, "r_bkic").unwrap() - 6.592).abs() < 1e-3);
        assert!((t.value(19, "c_u").unwrap() - 6.592).abs() < 1e-3);
        let mut prev = [f64::NEG_INFINITY; 3];
        for i in 0..30 {
            let v = [t.value(i, "r_t").unwrap(), t.value(i, "r_bkic").unwrap(), t.value(i, "c_u").unwrap()];
            assert!(v[0] < v[1] && v[1] <= v[2]);
            assert!(v[2] - v[1] < 0.01);
            assert!(v.iter().zip(&prev).all(|(a, b)| a >= b));
            prev = v;
        }
    }

    #[test]
    fn fig4_gap_shrinks() {
        let cfg = ExperimentConfig::resolve(Command::Fig4, &ConfigMap::new()).unwrap();
        let t = run_fig4(&cfg).unwrap();
        assert_eq!(t.columns[0], "T");
        assert_eq!(t.rows[0][0], "10");
        let gaps: Vec<f64> = (0..7).map(|i| t.value(i, "c_u").unwrap() - t.value(i, "r_t").unwrap()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert!(gaps[6] < 0.2);
    }

    #[test]
    fn monte_carlo_columns_expand() {
        let map: ConfigMap = [("trials", "20"), ("block-len", "10"), ("schemes", "r_bkic,mc_bkic_residual")]
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let cfg = ExperimentConfig::resolve(Command::Simulate, &map).unwrap();
        let t = run_table(&cfg).unwrap();
        assert_eq!(
            t.columns,
            vec!["p_x_db", "r_bkic", "mc_bkic_residual_mean", "mc_bkic_residual_stderr", "mc_bkic_residual_trials"]
        );
        assert_eq!(t.rows[0][4], "20");
        assert_eq!(run_table(&cfg).unwrap().render(), t.render());
    }

    #[test]
    fn nats_output() {
        let map: ConfigMap = [("log-base", "e")].iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let cfg = ExperimentConfig::resolve(Command::Rates, &map).unwrap();
        let t = run_table(&cfg).unwrap();
        let naive = t.value(0, "naive").unwrap();
        assert!((naive - 101f64.ln()).abs() < 1e-7);
        assert!(t.comments.iter().any(|c| c == "# log-base = e (nats)"));
    }
}
