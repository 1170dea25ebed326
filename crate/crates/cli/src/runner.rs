//! Model execution: evaluates one parameter point per model, handles the
//! optional sweep (optionally in parallel, output order fixed), and emits
//! the CSV table plus a JSON summary with a provenance block.

use std::fmt::Write as _;

use serde_json::json;

use layercast_core::bottleneck::{self, BottleneckConfig};
use layercast_core::harvest::{self, HarvestProfile};
use layercast_core::mac::{self, MacConfig};
use layercast_core::mixed::{self, DcNdcConfig};
use layercast_core::parallel::{self, TwoStateParallel};
use layercast_core::queue::{self, QueueServiceLaw};
use layercast_core::relay::{self, RelayConfig};
use layercast_core::siso;
use layercast_core::sr::{self, SrConfig};

use crate::config::ScenarioConfig;

pub struct RunError {
    pub exit_code: i32,
    pub message: String,
}

fn validation(msg: impl Into<String>) -> RunError {
    RunError { exit_code: 3, message: msg.into() }
}

fn numeric(msg: impl Into<String>) -> RunError {
    RunError { exit_code: 4, message: msg.into() }
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Computed quantities recorded in the JSON provenance block.
    pub quantities: Vec<String>,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Evaluate one row of the model at the given parameter overlay.
fn evaluate_point(cfg: &ScenarioConfig, sweep_value: Option<f64>) -> Result<Vec<f64>, RunError> {
    let get = |key: &str, default: Option<f64>| -> Result<f64, RunError> {
        if let (Some(sweep), Some(v)) = (&cfg.sweep, sweep_value) {
            if sweep.parameter == key {
                return Ok(v);
            }
        }
        cfg.number(key)
            .or(default)
            .ok_or_else(|| validation(format!("missing numeric parameter `{key}`")))
    };

    match cfg.model.as_str() {
        "siso" => {
            let p = db_to_linear(get("snr_db", None)?);
            let law = cfg.continuous_law().map_err(validation)?;
            let profile = siso::optimal_profile(&law, p).map_err(|e| numeric(e.to_string()))?;
            let r_bs = siso::expected_rate(&profile, &law);
            let outage = siso::outage_capacity(&law, p).rate;
            let erg = siso::ergodic_capacity(&law, p);
            Ok(vec![r_bs, outage, erg, (1.0 + p).ln()])
        }
        "relay" => {
            let p = db_to_linear(get("snr_db", None)?);
            let c = RelayConfig::new(p, p);
            let df1 = relay::df_single_level(&c).1;
            let df21 = relay::df_two_one(&c);
            let s1 = relay::scheme1_outage_broadcast(&c)
                .map(|s| s.rate)
                .map_err(|e| numeric(e.to_string()))?;
            let af = relay::af_broadcast_rate(&c);
            let baq = relay::baq_rate(&c).rate;
            let bc = relay::broadcast_cutset(&c);
            let erg = relay::ergodic_cutset(&c);
            let fcsi = relay::fcsi_upper(&c);
            Ok(vec![df1, df21, s1, af, baq, bc, erg, fcsi])
        }
        "queue" => {
            let lambda = get("lambda", None)?;
            let rates = cfg.list("layer_rates").ok_or_else(|| {
                validation("queue model needs `layer_rates` (per-layer rates)")
            })?;
            let probs = cfg
                .list("layer_probs")
                .ok_or_else(|| validation("queue model needs `layer_probs`"))?;
            let svc = QueueServiceLaw::from_layer_rates(&rates, probs)
                .map_err(|e| validation(e.to_string()))?;
            let bounds =
                queue::k_layer_queue_bounds(&svc, lambda).map_err(|e| numeric(e.to_string()))?;
            let delay =
                queue::k_layer_delay_ub(&svc, lambda).map_err(|e| numeric(e.to_string()))?;
            Ok(vec![bounds.lower, bounds.upper, delay])
        }
        "mixed-delay" => {
            let p = db_to_linear(get("snr_db", None)?);
            let beta = get("beta", Some(0.5))?;
            let law = cfg.continuous_law().map_err(validation)?;
            let c = DcNdcConfig::new(beta, p, law.clone()).map_err(|e| validation(e.to_string()))?;
            let out = mixed::outage_joint(&c);
            let bj = mixed::broadcast_joint(&c).map_err(|e| numeric(e.to_string()))?;
            let erg = siso::ergodic_capacity(&law, p);
            Ok(vec![
                out.dc_rate,
                out.ndc_rate,
                out.dc_rate + out.ndc_rate,
                bj.dc_rate,
                bj.ndc_rate,
                bj.dc_rate + bj.ndc_rate,
                erg,
            ])
        }
        "parallel" => {
            let p = db_to_linear(get("snr_db", None)?);
            let nu_a = get("weak_gain", Some(0.5))?;
            let nu_b = get("strong_gain", Some(2.0))?;
            let p_a = get("weak_prob", Some(0.5))?;
            let c = TwoStateParallel::new(nu_a, nu_b, p_a, p)
                .map_err(|e| validation(e.to_string()))?;
            let (_, opt) = parallel::optimal_sum_rate(&c);
            let sub = parallel::suboptimal_schemes(&c);
            Ok(vec![opt, sub.independent, sub.private_only, sub.common_only])
        }
        "sr" => {
            let p = db_to_linear(get("snr_db", None)?);
            let b = get("bandwidth_expansion", Some(1.0))?;
            if let Some(crate::config::LawConfig { kind, .. }) = &cfg.law {
                if kind == "discrete" {
                    let states = match cfg.law.as_ref().unwrap().build().map_err(validation)? {
                        crate::config::BuiltLaw::Discrete(s) => s,
                        crate::config::BuiltLaw::Continuous(_) => unreachable!(),
                    };
                    let (_, d_bs) = sr::discrete_min_distortion(&states, b, p)
                        .map_err(|e| numeric(e.to_string()))?;
                    // Single-layer reference over the same states.
                    let mut d_out = f64::INFINITY;
                    for (i, &s) in states.levels().iter().enumerate() {
                        let hit = states.tail_prob(i);
                        let d = (1.0 - hit) + hit * (1.0 + s * p).powf(-b);
                        d_out = d_out.min(d);
                    }
                    return Ok(vec![d_bs, d_out]);
                }
            }
            let law = cfg.continuous_law().map_err(validation)?;
            let c = SrConfig::new(b, p, law);
            let (_, d_bs) =
                sr::continuous_min_distortion(&c).map_err(|e| numeric(e.to_string()))?;
            let (_, d_out) = sr::outage_distortion(&c);
            Ok(vec![d_bs, d_out])
        }
        "bottleneck" => {
            let p = db_to_linear(get("snr_db", None)?);
            let cap = get("capacity", Some(4.0))?;
            let law = cfg.continuous_law().map_err(validation)?;
            let c = BottleneckConfig::fixed(cap, p, law).map_err(|e| validation(e.to_string()))?;
            let obliv_erg = bottleneck::oblivious_ergodic(&c);
            let df_erg = bottleneck::df_ergodic(&c);
            let obliv_bs =
                bottleneck::oblivious_broadcast(&c).map(|r| r.1).map_err(|e| numeric(e.to_string()))?;
            let non_bs = bottleneck::nonoblivious_broadcast(&c)
                .map(|r| r.1)
                .map_err(|e| numeric(e.to_string()))?;
            Ok(vec![obliv_erg, df_erg, obliv_bs, non_bs])
        }
        "mac" => {
            let p = db_to_linear(get("snr_db", None)?);
            let s1 = get("weak_gain", Some(0.25))?;
            let s2 = get("strong_gain", Some(1.0))?;
            let p_weak = get("weak_prob", Some(0.5))?;
            let c = MacConfig::two_state(s1, s2, p_weak, p_weak, p)
                .map_err(|e| validation(e.to_string()))?;
            let (_, rate) = mac::optimize_average_sum_rate(&c, p_weak);
            Ok(vec![rate])
        }
        other => Err(validation(format!("unknown model `{other}`"))),
    }
}

fn model_columns(model: &str) -> Result<(Vec<&'static str>, Vec<&'static str>), RunError> {
    Ok(match model {
        "siso" => (
            vec!["R_bs", "R_outage", "C_erg", "C_awgn"],
            vec![
                "expected rate of the optimal layering (nats)",
                "best single-layer rate (nats)",
                "ergodic capacity (nats)",
                "non-fading capacity ln(1+P)",
            ],
        ),
        "relay" => (
            vec!["DF1", "DF21", "Scheme1", "AF", "BAQ", "bc_cutset", "erg_cutset", "fcsi"],
            vec![
                "single-level decode-forward",
                "two-layer source, rate-matched relay",
                "outage source with layered relay",
                "amplify-forward layering over the equivalent gain",
                "broadcast-amplify-quantize",
                "layering cut-set bound",
                "ergodic cut-set bound",
                "full-CSI bound",
            ],
        ),
        "queue" => (
            vec!["queue_lower", "queue_upper", "delay_upper"],
            vec!["stationary queue bounds and the variance-based delay bound"],
        ),
        "mixed-delay" => (
            vec![
                "R_dc_outage",
                "R_ndc_outage",
                "total_outage",
                "R_dc_bs",
                "R_ndc_bs",
                "total_bs",
                "C_erg",
            ],
            vec!["jointly optimal single-layer and layered DC against one NDC codeword"],
        ),
        "parallel" => (
            vec!["optimal", "independent", "private_only", "common_only"],
            vec!["closed-form optimal sum rate and the three reference schemes"],
        ),
        "sr" => (
            vec!["distortion_bs", "distortion_outage"],
            vec!["minimum expected distortion: layered vs single layer"],
        ),
        "bottleneck" => (
            vec!["obliv_erg", "df_erg", "obliv_bs", "nonobliv_bs"],
            vec!["compressed-relay and decode-forward rates (half-log units)"],
        ),
        "mac" => (
            vec!["avg_sum_rate"],
            vec!["optimized two-user average sum rate (half-log2 units)"],
        ),
        other => return Err(validation(format!("unknown model `{other}`"))),
    })
}

/// Runs the scenario: evaluates the sweep (or single point) and returns
/// the result table. Sweep points run on up to LAYERCAST_THREADS workers;
/// rows are emitted in grid order regardless of completion order.
pub fn run_table(cfg: &ScenarioConfig) -> Result<Table, RunError> {
    if cfg.model == "harvest" {
        return run_harvest(cfg);
    }
    let (cols, quantities) = model_columns(&cfg.model)?;
    let (sweep_name, grid): (String, Vec<Option<f64>>) = match &cfg.sweep {
        Some(s) => {
            if s.grid.is_empty() {
                return Err(validation("sweep grid is empty"));
            }
            (s.parameter.clone(), s.grid.iter().map(|&v| Some(v)).collect())
        }
        None => ("point".to_string(), vec![None]),
    };

    let threads: usize = std::env::var("LAYERCAST_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
        .max(1)
        .min(grid.len());

    let mut results: Vec<Option<Result<Vec<f64>, RunError>>> =
        (0..grid.len()).map(|_| None).collect();
    if threads <= 1 {
        for (i, &point) in grid.iter().enumerate() {
            results[i] = Some(evaluate_point(cfg, point));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots: Vec<std::sync::Mutex<Option<Result<Vec<f64>, RunError>>>> =
            (0..grid.len()).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= grid.len() {
                        break;
                    }
                    let out = evaluate_point(cfg, grid[i]);
                    *slots[i].lock().unwrap() = Some(out);
                });
            }
        });
        for (i, slot) in slots.into_iter().enumerate() {
            results[i] = slot.into_inner().unwrap();
        }
    }

    let mut rows = Vec::with_capacity(grid.len());
    for (i, res) in results.into_iter().enumerate() {
        let values = res.expect("all points evaluated")?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(numeric(format!(
                "non-finite value at sweep point {i}: {values:?}"
            )));
        }
        let mut row = Vec::with_capacity(values.len() + 1);
        row.push(grid[i].unwrap_or(0.0));
        row.extend(values);
        rows.push(row);
    }
    let mut columns = vec![sweep_name];
    columns.extend(cols.iter().map(|s| s.to_string()));
    Ok(Table {
        columns,
        rows,
        quantities: quantities.iter().map(|s| s.to_string()).collect(),
    })
}

fn run_harvest(cfg: &ScenarioConfig) -> Result<Table, RunError> {
    let gamma = cfg
        .list("cumulative_energy")
        .ok_or_else(|| validation("harvest model needs `cumulative_energy`"))?;
    let harvest =
        HarvestProfile::from_cumulative(gamma.clone()).map_err(|e| validation(e.to_string()))?;
    let law = cfg.continuous_law().map_err(validation)?;
    let laws = vec![law; gamma.len()];
    let (result, total) = harvest::end_to_end(&laws, &harvest).map_err(|e| numeric(e.to_string()))?;
    let mut rows = Vec::new();
    for (b, &p) in result.powers.iter().enumerate() {
        let tight = if result.dominant.contains(&(b + 1)) { 1.0 } else { 0.0 };
        rows.push(vec![(b + 1) as f64, gamma[b], p, tight]);
    }
    rows.push(vec![0.0, 0.0, 0.0, total]);
    Ok(Table {
        columns: vec!["block".into(), "gamma".into(), "power".into(), "tight_or_total".into()],
        rows,
        quantities: vec![
            "staircase power allocation over blocks; final row carries the total rate".into(),
        ],
    })
}

/// 12-significant-digit scientific formatting, stable across runs.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn to_csv(cfg: &ScenarioConfig, table: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# layercast model={} seed={}", cfg.model, cfg.seed);
    for q in &table.quantities {
        let _ = writeln!(out, "# {q}");
    }
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn to_json(cfg: &ScenarioConfig, table: &Table) -> String {
    let rows: Vec<Vec<f64>> = table.rows.clone();
    let doc = json!({
        "provenance": {
            "module": cfg.model,
            "quantities": table.quantities,
            "tolerances": {
                "abs_tol": 1e-10,
                "rel_tol": 1e-9,
            },
            "seed": cfg.seed,
        },
        "columns": table.columns,
        "rows": rows,
    });
    serde_json::to_string_pretty(&doc).expect("json serialization")
}
