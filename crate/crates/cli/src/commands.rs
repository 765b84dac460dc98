//! One function per subcommand. Each returns the tables it produced; the
//! caller decides where they go.

use sympara_core::diagnostics::surrogate_terms;
use sympara_core::parareal::StopReason;
use sympara_core::{
    catalog, compare_coarse_choices, energy_error_series, integrate, is_symmetric, matched_coarse, order_study,
    oscillation, run, PararealRun, PhaseState, PropagatorPair, Schedule, SplittingScheme,
};

use crate::config::{CoarseChoice, ExperimentConfig};
use crate::csv::{fmt_float, Table};
use crate::CliError;

/// A named output file and a one-line human summary.
#[derive(Debug, Clone)]
pub struct Output {
    pub files: Vec<(String, Table)>,
    pub summary: String,
}

fn coord_names(dim: usize) -> (Vec<String>, Vec<String>) {
    if dim == 1 {
        return (vec!["q".into()], vec!["p".into()]);
    }
    (
        (0..dim).map(|i| format!("q{i}")).collect(),
        (0..dim).map(|i| format!("p{i}")).collect(),
    )
}

fn state_cells(z: &PhaseState) -> impl Iterator<Item = String> + '_ {
    z.q.iter().chain(&z.p).map(|&x| fmt_float(x))
}

fn resolve(choice: &CoarseChoice, fine: &SplittingScheme) -> SplittingScheme {
    match choice {
        CoarseChoice::Matched => matched_coarse(fine),
        CoarseChoice::Named(s) => s.clone(),
    }
}

pub fn cmd_integrate(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let scheme = cfg.require("scheme", &cfg.scheme)?;
    let dt = cfg.require("dt", &cfg.dt)?;
    let steps = cfg.integration_steps()?;
    let traj = integrate(&scheme, &cfg.system, &cfg.initial, dt, steps)?;
    let series = energy_error_series(&traj, &cfg.system)?;

    let (qs, ps) = coord_names(cfg.system.dim());
    let mut table = Table::new(
        std::iter::once("t".to_string())
            .chain(qs)
            .chain(ps)
            .chain(["energy_error".into()]),
    );
    for (z, e) in traj.states.iter().zip(&series.values) {
        let row = std::iter::once(fmt_float(z.t))
            .chain(state_cells(z))
            .chain([fmt_float(*e)])
            .collect();
        table.push(row);
    }
    let summary = format!(
        "integrate: {} on {}, {steps} steps of {dt}; energy oscillation {:e}",
        scheme.name(),
        cfg.system.name(),
        series.oscillation()
    );
    Ok(Output {
        files: vec![("trajectory.csv".into(), table)],
        summary,
    })
}

fn parareal_pair(cfg: &ExperimentConfig) -> Result<PropagatorPair, CliError> {
    let fine = cfg.require("fine", &cfg.fine)?;
    let coarse = cfg.require("coarse", &cfg.coarse)?;
    let pair = match coarse {
        CoarseChoice::Matched => PropagatorPair::matched(fine)?,
        CoarseChoice::Named(c) if is_symmetric(&fine) && is_symmetric(&c) => PropagatorPair::new(fine, c)?,
        CoarseChoice::Named(c) => PropagatorPair::unchecked(fine, c),
    };
    Ok(pair.with_coarse_substeps(cfg.coarse_substeps)?)
}

pub fn run_parareal(cfg: &ExperimentConfig, schedule: &Schedule) -> Result<PararealRun, CliError> {
    let pair = parareal_pair(cfg)?;
    let grid = cfg.grid()?;
    let tol = cfg.require("tol", &cfg.tol)?;
    let k_max = cfg.require("k_max", &cfg.k_max)?;
    Ok(run(
        &pair,
        &cfg.system,
        &cfg.initial,
        &grid,
        &cfg.corrector,
        tol,
        k_max,
        schedule,
    )?)
}

pub fn cmd_parareal(cfg: &ExperimentConfig, schedule: &Schedule) -> Result<Output, CliError> {
    let result = run_parareal(cfg, schedule)?;
    let terms = surrogate_terms(&result, &cfg.system)?;

    let mut defects = Table::new(["k", "defect", "energy_osc", "surrogate_term"]);
    for (it, term) in result.iterations.iter().skip(1).zip(&terms) {
        defects.push(vec![
            it.k.to_string(),
            fmt_float(it.defect),
            fmt_float(oscillation(&it.energy_series)?),
            fmt_float(*term),
        ]);
    }
    let converged = match result.converged_at {
        Some(k) => k.to_string(),
        None => "none".into(),
    };
    defects.comment(format!("converged_at={converged}"));

    let (qs, ps) = coord_names(cfg.system.dim());
    let mut nodes = Table::new(["n".to_string(), "t".to_string()].into_iter().chain(qs).chain(ps));
    for (n, z) in result.last().node_states.iter().enumerate() {
        nodes.push(
            [n.to_string(), fmt_float(z.t)]
                .into_iter()
                .chain(state_cells(z))
                .collect(),
        );
    }

    let how = match result.stop_reason {
        Some(StopReason::Tolerance) => "defect below tolerance",
        Some(StopReason::Exactness) => "k reached the branch count",
        None => "not converged within k_max",
    };
    let summary = format!(
        "parareal: fine {} / coarse {}, converged_at={converged} ({how})",
        result.meta.fine, result.meta.coarse
    );
    Ok(Output {
        files: vec![("defects.csv".into(), defects), ("nodes.csv".into(), nodes)],
        summary,
    })
}

pub fn cmd_compare(cfg: &ExperimentConfig, schedule: &Schedule) -> Result<Output, CliError> {
    let fine = cfg.require("fine", &cfg.fine)?;
    let choices = cfg.require("candidates", &cfg.candidates)?;
    let grid = cfg.grid()?;
    let tol = cfg.require("tol", &cfg.tol)?;
    let k_max = cfg.require("k_max", &cfg.k_max)?;
    let candidates: Vec<SplittingScheme> = choices.iter().map(|c| resolve(c, &fine)).collect();
    let result = compare_coarse_choices(
        &fine,
        &candidates,
        &cfg.system,
        &cfg.initial,
        &grid,
        tol,
        k_max,
        schedule,
    )?;

    let mut table = Table::new(["scheme", "converged_at", "final_defect", "surrogate_length"]);
    for (choice, row) in choices.iter().zip(&result.rows) {
        let cells = match &row.outcome {
            Ok(o) => vec![
                choice.label().to_string(),
                o.converged_at.map_or("none".into(), |k| k.to_string()),
                fmt_float(o.final_defect()),
                fmt_float(o.surrogate_length),
            ],
            Err(e) => vec![
                choice.label().to_string(),
                format!("error:{}", e.code()),
                String::new(),
                String::new(),
            ],
        };
        table.push(cells);
    }
    Ok(Output {
        summary: format!("compare: {} coarse candidates for fine {}", choices.len(), fine.name()),
        files: vec![("compare.csv".into(), table)],
    })
}

pub fn cmd_order(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let scheme = cfg.require("scheme", &cfg.scheme)?;
    let t_end = cfg.require("t_end", &cfg.t_end)?;
    let taus = cfg.require("taus", &cfg.taus)?;
    let study = order_study(&scheme, &cfg.system, &cfg.initial, t_end, &taus)?;

    let mut table = Table::new(["tau", "error"]);
    for (tau, err) in study.taus.iter().zip(&study.errors) {
        table.push(vec![fmt_float(*tau), fmt_float(*err)]);
    }
    table.comment(format!("slope={}", fmt_float(study.slope)));
    let reference = if study.exact_reference {
        "exact flow"
    } else {
        "tau_min/10 run"
    };
    Ok(Output {
        summary: format!(
            "order: {} on {}, slope {:.4} (nominal {}, reference: {reference})",
            scheme.name(),
            cfg.system.name(),
            study.slope,
            scheme.nominal_order()
        ),
        files: vec![("order.csv".into(), table)],
    })
}

/// The built-in catalog; provenance notes go in the footer since they may
/// contain commas.
pub fn cmd_schemes() -> Table {
    let mut table = Table::new(["name", "order", "stages", "kicks", "symmetric"]);
    let all = catalog();
    for s in &all {
        table.push(vec![
            s.name().to_string(),
            s.nominal_order().to_string(),
            s.stages().to_string(),
            s.kick_count().to_string(),
            is_symmetric(s).to_string(),
        ]);
    }
    for s in &all {
        table.comment(format!("{}: {}", s.name(), s.provenance()));
    }
    table
}
