//! Subcommand implementations.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use keyrate_core::channel::X;
use keyrate_core::region::fb::fb_entropies;
use keyrate_core::sim::{FbRates, LeakageMode, NofbRates, SimOptions, TypicalityParams};
use keyrate_core::{
    build_fb_constraints, build_joint_fb, build_joint_nofb, eval_inner_fb, eval_inner_nofb,
    eval_outer_nofb, fm_eliminate, maximize_inner_nofb, maximize_outer_nofb, reduce_to_wiretap,
    verify_fm_matches_closed_form, BroadcastChannel, SearchBudget, SimulationReport, WiretapMode,
};

use crate::args::*;
use crate::emit::{emit, sha256_hex, write_csv, write_text, Table};
use crate::schema::{AuxSchemeFile, ChannelFile, FbSchemeFile, InputKernelFile};
use crate::CliError;

fn load_bytes(path: &Path) -> Result<(Vec<u8>, String), CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::validation(format!("cannot read {path:?}: {e}")))?;
    let hash = sha256_hex(&bytes);
    Ok((bytes, hash))
}

fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| {
        CliError::validation(format!(
            "{path:?}: parse error at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

/// Parse and validate a channel file.
pub fn parse_channel(path: &Path) -> Result<(BroadcastChannel, ChannelFile, String), CliError> {
    let (bytes, hash) = load_bytes(path)?;
    let file: ChannelFile = parse_json(&bytes, path)?;
    let channel = file.to_channel()?;
    Ok((channel, file, hash))
}

#[derive(Debug, Serialize)]
struct FileRef {
    path: String,
    sha256: String,
}

fn file_ref(path: &Path, hash: String) -> FileRef {
    FileRef { path: path.display().to_string(), sha256: hash }
}

pub fn region_inner_nofb(a: InnerNofbArgs) -> Result<(), CliError> {
    let (channel, _, ch_hash) = parse_channel(&a.channel)?;
    if !a.search && a.scheme.is_none() {
        return Err(CliError::validation(
            "region inner-nofb needs either --scheme <file> or --search".to_string(),
        ));
    }

    #[derive(Serialize)]
    struct Config {
        channel: FileRef,
        #[serde(skip_serializing_if = "Option::is_none")]
        scheme: Option<FileRef>,
        search: bool,
        cards: (usize, usize, usize),
        weights: [f64; 3],
        restarts: usize,
        iters: usize,
    }

    let default_card = channel.card(X) + 1;
    let cards = (
        a.u0.unwrap_or(default_card),
        a.u1.unwrap_or(default_card),
        a.u2.unwrap_or(default_card),
    );
    let weights = [a.w0, a.w1, a.w2];

    if let Some(scheme_path) = &a.scheme {
        let (bytes, s_hash) = load_bytes(scheme_path)?;
        let file: AuxSchemeFile = parse_json(&bytes, scheme_path)?;
        let scheme = file.to_scheme(&channel)?;
        let joint = build_joint_nofb(&channel, &scheme).map_err(CliError::from_core)?;
        let point = eval_inner_nofb(&joint).map_err(CliError::from_core)?;
        let config = Config {
            channel: file_ref(&a.channel, ch_hash),
            scheme: Some(file_ref(scheme_path, s_hash)),
            search: false,
            cards: (scheme.card_u0(), scheme.card_u1(), scheme.card_u2()),
            weights,
            restarts: 0,
            iters: 0,
        };
        let mut t = Table::new();
        t.row("bound r0", point.r0)
            .row("bound r1", point.r1)
            .row("bound r2", point.r2)
            .row("bound r0+r1", point.r0_plus_r1)
            .row("bound r0+r2", point.r0_plus_r2)
            .row("bound r0+r1+r2", point.r0_plus_r1_plus_r2)
            .row("feasible", point.feasible);
        emit(
            "region inner-nofb",
            config,
            None,
            point,
            a.out.as_deref(),
            &t.render(),
        )
    } else {
        let budget = SearchBudget {
            restarts: a.search_opts.restarts,
            iters: a.search_opts.iters,
            seed: a.search_opts.seed,
            ..Default::default()
        };
        let report = maximize_inner_nofb(&channel, cards, weights, &budget)
            .map_err(CliError::from_core)?;
        if let Some(csv) = &a.csv {
            let rows: Vec<Vec<String>> = report
                .search_trace
                .iter()
                .map(|t| vec![t.restart.to_string(), format!("{}", t.objective)])
                .collect();
            write_csv(csv, &["restart", "objective"], &rows)?;
        }
        let config = Config {
            channel: file_ref(&a.channel, ch_hash),
            scheme: None,
            search: true,
            cards,
            weights,
            restarts: budget.restarts,
            iters: budget.iters,
        };
        let mut t = Table::new();
        t.row("objective", report.objective)
            .row("rates", format!("{:?}", report.best_rates))
            .row("bound r0", report.best_point.r0)
            .row("bound r1", report.best_point.r1)
            .row("bound r2", report.best_point.r2)
            .row("outer r0_max", report.outer.r0_max)
            .row("outer r1_max", report.outer.r1_max)
            .row("outer r2_max", report.outer.r2_max)
            .row("containment_ok", report.containment_ok);
        emit(
            "region inner-nofb",
            config,
            Some(budget.seed),
            report,
            a.out.as_deref(),
            &t.render(),
        )
    }
}

pub fn region_outer_nofb(a: OuterNofbArgs) -> Result<(), CliError> {
    let (channel, _, ch_hash) = parse_channel(&a.channel)?;
    if !a.search && a.input.is_none() {
        return Err(CliError::validation(
            "region outer-nofb needs either --input <file> or --search".to_string(),
        ));
    }

    #[derive(Serialize)]
    struct Config {
        channel: FileRef,
        #[serde(skip_serializing_if = "Option::is_none")]
        input: Option<FileRef>,
        search: bool,
        restarts: usize,
        iters: usize,
    }

    if let Some(input_path) = &a.input {
        let (bytes, i_hash) = load_bytes(input_path)?;
        let file: InputKernelFile = parse_json(&bytes, input_path)?;
        let kernel = file.to_kernel(&channel)?;
        let joint = channel.joint_with_input(&kernel).map_err(CliError::from_core)?;
        channel
            .consistent_with(&joint, 1e-9)
            .map_err(CliError::from_core)?;
        let b = eval_outer_nofb(&joint).map_err(CliError::from_core)?;
        let config = Config {
            channel: file_ref(&a.channel, ch_hash),
            input: Some(file_ref(input_path, i_hash)),
            search: false,
            restarts: 0,
            iters: 0,
        };
        let mut t = Table::new();
        t.row("r0_max", b.r0_max)
            .row("r1_max", b.r1_max)
            .row("r2_max", b.r2_max);
        emit("region outer-nofb", config, None, b, a.out.as_deref(), &t.render())
    } else {
        let budget = SearchBudget {
            restarts: a.search_opts.restarts,
            iters: a.search_opts.iters,
            seed: a.search_opts.seed,
            ..Default::default()
        };
        let b = maximize_outer_nofb(&channel, &budget).map_err(CliError::from_core)?;
        let config = Config {
            channel: file_ref(&a.channel, ch_hash),
            input: None,
            search: true,
            restarts: budget.restarts,
            iters: budget.iters,
        };
        let mut t = Table::new();
        t.row("r0_max", b.r0_max)
            .row("r1_max", b.r1_max)
            .row("r2_max", b.r2_max);
        emit(
            "region outer-nofb",
            config,
            Some(budget.seed),
            b,
            a.out.as_deref(),
            &t.render(),
        )
    }
}

fn load_fb(
    channel_path: &Path,
    scheme_path: &Path,
) -> Result<(BroadcastChannel, keyrate_core::FeedbackScheme, String, String), CliError> {
    let (channel, _, ch_hash) = parse_channel(channel_path)?;
    let (bytes, s_hash) = load_bytes(scheme_path)?;
    let file: FbSchemeFile = parse_json(&bytes, scheme_path)?;
    let scheme = file.to_scheme(&channel)?;
    Ok((channel, scheme, ch_hash, s_hash))
}

pub fn region_inner_fb(a: InnerFbArgs) -> Result<(), CliError> {
    let (channel, scheme, ch_hash, s_hash) = load_fb(&a.channel, &a.scheme)?;
    let joint = build_joint_fb(&channel, &scheme).map_err(CliError::from_core)?;
    let point = eval_inner_fb(&joint).map_err(CliError::from_core)?;
    let system = build_fb_constraints(&joint, a.eq24_literal).map_err(CliError::from_core)?;
    let entropies = fb_entropies(&joint).map_err(CliError::from_core)?;
    let projected =
        fm_eliminate(&system, &["Rp1", "Rp2"]).map_err(CliError::from_core)?;

    if let Some(path) = &a.system_out {
        write_text(path, &system.to_text())?;
    }

    #[derive(Serialize)]
    struct Config {
        channel: FileRef,
        scheme: FileRef,
        eq24_literal: bool,
    }
    #[derive(Serialize)]
    struct ResultBody {
        point: keyrate_core::FbInnerPoint,
        entropies: keyrate_core::region::fb::FbEntropies,
        constraints_text: String,
        projected_text: String,
        projected_infeasible: bool,
    }

    let mut t = Table::new();
    t.row("r1_max", point.r1_max)
        .row("r2_max", point.r2_max)
        .row("sum_max", point.sum_max)
        .row("projected infeasible", projected.is_infeasible());
    let result = ResultBody {
        constraints_text: system.to_text(),
        projected_text: projected.to_text(),
        projected_infeasible: projected.is_infeasible(),
        point,
        entropies,
    };
    let config = Config {
        channel: file_ref(&a.channel, ch_hash),
        scheme: file_ref(&a.scheme, s_hash),
        eq24_literal: a.eq24_literal,
    };
    emit("region inner-fb", config, None, result, a.out.as_deref(), &t.render())
}

pub fn region_fm_verify(a: FmVerifyArgs) -> Result<(), CliError> {
    let (channel, scheme, ch_hash, s_hash) = load_fb(&a.channel, &a.scheme)?;
    let joint = build_joint_fb(&channel, &scheme).map_err(CliError::from_core)?;
    let report = verify_fm_matches_closed_form(&joint, a.grid_step, a.tolerance, a.eq24_literal)
        .map_err(CliError::from_core)?;

    #[derive(Serialize)]
    struct Config {
        channel: FileRef,
        scheme: FileRef,
        grid_step: f64,
        tolerance: f64,
        eq24_literal: bool,
    }
    let config = Config {
        channel: file_ref(&a.channel, ch_hash),
        scheme: file_ref(&a.scheme, s_hash),
        grid_step: a.grid_step,
        tolerance: a.tolerance,
        eq24_literal: a.eq24_literal,
    };
    let mut t = Table::new();
    t.row("points checked", report.points_checked)
        .row("disagreements", report.disagreements.len())
        .row("identity gap rx1", report.identity_gap_rx1)
        .row("identity gap rx2", report.identity_gap_rx2)
        .row("quantizer coupling", report.quantizer_coupling)
        .row("degenerate", report.degenerate);
    emit("region fm-verify", config, None, report, a.out.as_deref(), &t.render())
}

fn leakage_mode(arg: LeakageArg) -> LeakageMode {
    match arg {
        LeakageArg::Auto => LeakageMode::Auto,
        LeakageArg::Plugin => LeakageMode::PlugIn,
        LeakageArg::Skip => LeakageMode::Skip,
    }
}

fn report_table(r: &SimulationReport) -> String {
    let mut t = Table::new();
    t.row("protocol", &r.protocol)
        .row("trials", r.trials)
        .row("n", r.n)
        .row("eps", r.eps);
    for (name, rate) in &r.realized_rates {
        t.row(&format!("realized {name}"), rate);
    }
    if let Some(k0) = r.errors.k0 {
        t.row("error k0", k0);
    }
    t.row("error k1", r.errors.k1)
        .row("error k2", r.errors.k2)
        .row("error total", r.errors.total);
    for m in &r.leakage {
        t.row(
            &format!("leakage {} (bits/use)", m.name),
            format!("{} [{:?}]", m.bits_per_use, m.estimator),
        );
    }
    for k in &r.key_entropy {
        t.row(&format!("entropy {} (bits)", k.key), k.empirical_bits);
    }
    t.render()
}

fn report_csv(r: &SimulationReport) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |metric: &str, value: String| rows.push(vec![metric.to_string(), value]);
    push("trials", r.trials.to_string());
    push("n", r.n.to_string());
    push("eps", format!("{}", r.eps));
    for (name, rate) in &r.realized_rates {
        push(&format!("realized_{name}"), format!("{rate}"));
    }
    if let Some(k0) = r.errors.k0 {
        push("error_k0", format!("{k0}"));
    }
    push("error_k1", format!("{}", r.errors.k1));
    push("error_k2", format!("{}", r.errors.k2));
    push("error_total", format!("{}", r.errors.total));
    push("failures_covering", r.failures.covering.to_string());
    push("failures_packing_rx1", r.failures.packing_rx1.to_string());
    push("failures_packing_rx2", r.failures.packing_rx2.to_string());
    push("failures_receiver_rx1", r.failures.receiver_rx1.to_string());
    push("failures_receiver_rx2", r.failures.receiver_rx2.to_string());
    push("failures_recover", r.failures.recover.to_string());
    for m in &r.leakage {
        push(&format!("leakage_{}", m.name), format!("{}", m.bits_per_use));
    }
    for k in &r.key_entropy {
        push(&format!("entropy_{}", k.key), format!("{}", k.empirical_bits));
    }
    rows
}

pub fn simulate_nofb(a: SimNofbArgs) -> Result<(), CliError> {
    let (channel, _, ch_hash) = parse_channel(&a.channel)?;
    let (bytes, s_hash) = load_bytes(&a.scheme)?;
    let file: AuxSchemeFile = parse_json(&bytes, &a.scheme)?;
    let scheme = file.to_scheme(&channel)?;
    let tp = TypicalityParams::new(a.common.n, a.common.eps).map_err(CliError::from_core)?;
    let rates = NofbRates {
        rt0: a.rt0,
        rt1: a.rt1,
        rt2: a.rt2,
        r0: a.r0,
        r1: a.r1,
        r2: a.r2,
    };
    let opts = SimOptions {
        leakage: leakage_mode(a.common.leakage),
        trial_log: a.common.trial_log,
    };
    let report = keyrate_core::run_nofb(
        &channel,
        &scheme,
        &rates,
        &tp,
        a.common.trials,
        a.common.seed,
        &opts,
    )
    .map_err(CliError::from_core)?;

    if let Some(csv) = &a.common.csv {
        write_csv(csv, &["metric", "value"], &report_csv(&report))?;
    }

    #[derive(Serialize)]
    struct Config {
        channel: FileRef,
        scheme: FileRef,
        rates: NofbRates,
        n: usize,
        eps: f64,
        trials: u64,
        leakage: String,
        trial_log: bool,
    }
    let config = Config {
        channel: file_ref(&a.channel, ch_hash),
        scheme: file_ref(&a.scheme, s_hash),
        rates,
        n: a.common.n,
        eps: a.common.eps,
        trials: a.common.trials,
        leakage: format!("{:?}", a.common.leakage),
        trial_log: a.common.trial_log,
    };
    let table = report_table(&report);
    emit(
        "simulate nofb",
        config,
        Some(a.common.seed),
        report,
        a.common.out.as_deref(),
        &table,
    )
}

pub fn simulate_fb(a: SimFbArgs) -> Result<(), CliError> {
    let (channel, scheme, ch_hash, s_hash) = load_fb(&a.channel, &a.scheme)?;
    let tp = TypicalityParams::new(a.common.n, a.common.eps).map_err(CliError::from_core)?;
    let rates = FbRates { rp1: a.rp1, rp2: a.rp2, r1: a.r1, r2: a.r2 };
    let opts = SimOptions {
        leakage: leakage_mode(a.common.leakage),
        trial_log: a.common.trial_log,
    };
    let report = keyrate_core::run_fb(
        &channel,
        &scheme,
        &rates,
        &tp,
        a.common.trials,
        a.common.seed,
        &opts,
    )
    .map_err(CliError::from_core)?;

    if let Some(csv) = &a.common.csv {
        write_csv(csv, &["metric", "value"], &report_csv(&report))?;
    }

    #[derive(Serialize)]
    struct Config {
        channel: FileRef,
        scheme: FileRef,
        rates: FbRates,
        n: usize,
        eps: f64,
        trials: u64,
        leakage: String,
        trial_log: bool,
    }
    let config = Config {
        channel: file_ref(&a.channel, ch_hash),
        scheme: file_ref(&a.scheme, s_hash),
        rates,
        n: a.common.n,
        eps: a.common.eps,
        trials: a.common.trials,
        leakage: format!("{:?}", a.common.leakage),
        trial_log: a.common.trial_log,
    };
    let table = report_table(&report);
    emit(
        "simulate fb",
        config,
        Some(a.common.seed),
        report,
        a.common.out.as_deref(),
        &table,
    )
}

pub fn reduce_wiretap(a: WiretapArgs) -> Result<(), CliError> {
    let (channel, _, ch_hash) = parse_channel(&a.channel)?;
    let mode = match a.mode {
        WiretapModeArg::Nofb => WiretapMode::Nofb,
        WiretapModeArg::FbKeepRx1 => WiretapMode::FbKeepRx1,
        WiretapModeArg::FbKeepRx2 => WiretapMode::FbKeepRx2,
    };
    let reduced = reduce_to_wiretap(&channel, mode).map_err(CliError::from_core)?;
    let file = ChannelFile::from_channel(&reduced);
    if let Some(path) = &a.channel_out {
        crate::emit::write_json(path, &file)?;
    }

    #[derive(Serialize)]
    struct Config {
        channel: FileRef,
        mode: String,
    }
    let config = Config {
        channel: file_ref(&a.channel, ch_hash),
        mode: format!("{:?}", a.mode),
    };
    let mut t = Table::new();
    t.row("mode", format!("{:?}", a.mode))
        .row("|Y1|", file.alphabets.y1)
        .row("|Y2|", file.alphabets.y2)
        .row("|Z|", file.alphabets.z);
    emit("reduce wiretap", config, None, file, a.out.as_deref(), &t.render())
}
