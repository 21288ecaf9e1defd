use std::fmt::Write as _;
use std::path::Path;

use sprint_core::catalog::{cavity_from_mirrors, ion_preset, postselected_efficiency};
use sprint_core::model::{average_over, effective_detunings, AggregateOutcome, GateResponse};
use sprint_core::optimize::{
    landmark_parameters, linspace, optimize_asymmetric, sweep_coupling,
    symmetric_optimal_detunings, SweepOptions,
};
use sprint_core::oracle::{equivalence_suite, CaseResult, OracleCase, SuiteReport};
use sprint_core::units::{mhz, to_khz, to_mhz};
use sprint_core::{CavityFlavor, DriveSettings, IonId, JointQubitState, LambdaSystem, Preset};

use crate::config::{OracleSection, Scenario};
use crate::error::{CliError, CliResult};
use crate::output::{histogram_path, num, sink, write_histogram, write_table};

/// Conservation limit for `oracle-check`.
const CONSERVATION_LIMIT: f64 = 1e-6;

/// Equal-superposition input used when a command needs one state and the
/// config gives none.
fn default_state() -> JointQubitState {
    JointQubitState::from_angles(
        std::f64::consts::FRAC_PI_2,
        0.0,
        std::f64::consts::FRAC_PI_2,
        0.0,
    )
}

fn effective_drive(s: &Scenario) -> CliResult<DriveSettings> {
    if !s.symmetric_optimum {
        return Ok(s.drive);
    }
    let opt = symmetric_optimal_detunings(&s.cavity, &s.system)?;
    let (dc, da) = opt.branch(s.branch);
    Ok(DriveSettings::detuned(dc, da, 0.0))
}

fn aggregate_lines(report: &mut String, prefix: &str, a: &AggregateOutcome) {
    let _ = writeln!(report, "{prefix}mean_F      = {:.6}", a.mean_fidelity);
    let _ = writeln!(report, "{prefix}sigma_F     = {:.6}", a.sigma_fidelity);
    let _ = writeln!(report, "{prefix}mean_eta    = {:.6}", a.mean_efficiency);
    let _ = writeln!(report, "{prefix}sigma_eta   = {:.6}", a.sigma_efficiency);
    if a.undefined > 0 {
        let _ = writeln!(
            report,
            "{prefix}undefined_F = {} of {}",
            a.undefined, a.samples
        );
    }
}

pub fn outcome(s: &Scenario, out: Option<&Path>) -> CliResult<String> {
    let drive = effective_drive(s)?;
    let response = GateResponse::new(
        &s.system,
        &s.cavity,
        &effective_detunings(&drive, &s.system),
    )?;
    let mut report = String::new();
    let _ = writeln!(
        report,
        "delta_c = {:.6} MHz, delta_a = {:.6} MHz, B = {:.6} G",
        to_mhz(drive.delta_c),
        to_mhz(drive.delta_a),
        drive.b_field
    );
    let mut header = vec![];
    let mut row = vec![];

    let single = s.state.or(s.sampler.is_none().then(default_state));
    if let Some(state) = single {
        let o = response.outcome(&state);
        let f = o.fidelity.unwrap_or(f64::NAN);
        let _ = writeln!(report, "P_D = {:.9e}", o.p_dark);
        let _ = writeln!(report, "P_B = {:.9e}", o.p_bright);
        let _ = writeln!(report, "F   = {f:.9}");
        let _ = writeln!(report, "eta = {:.9}", o.efficiency);
        header.extend(["P_D", "P_B", "F", "eta"]);
        row.extend([num(o.p_dark), num(o.p_bright), num(f), num(o.efficiency)]);
    }
    let mut hist = None;
    if let Some(spec) = &s.sampler {
        let a = average_over(&response, &spec.draw()?)?;
        let _ = writeln!(
            report,
            "samples = {} ({:?}, seed {})",
            spec.count, spec.mode, spec.seed
        );
        aggregate_lines(&mut report, "", &a);
        header.extend(["F_mean", "F_sigma", "eta_mean", "eta_sigma"]);
        row.extend([
            num(a.mean_fidelity),
            num(a.sigma_fidelity),
            num(a.mean_efficiency),
            num(a.sigma_efficiency),
        ]);
        hist = Some(a.histogram);
    }
    if let Some(path) = out {
        let mut h = vec!["delta_c_MHz", "delta_a_MHz", "B_G"];
        h.extend(header);
        let mut r = vec![
            num(to_mhz(drive.delta_c)),
            num(to_mhz(drive.delta_a)),
            num(drive.b_field),
        ];
        r.extend(row);
        write_table(sink(Some(path))?, &h, &[r])?;
        if let Some(h) = hist {
            write_histogram(&histogram_path(path), &h)?;
        }
    }
    Ok(report)
}

pub fn sweep(s: &Scenario, out: Option<&Path>) -> CliResult<()> {
    let cfg = s
        .sweep
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    if cfg.points == 0 {
        return Err(CliError::Config("sweep.points must be positive".into()));
    }
    let [lo, hi] = cfg.kappa_ex_mhz;
    if !(lo <= hi) {
        return Err(CliError::Config(
            "sweep.kappa_ex_mhz is an empty range".into(),
        ));
    }
    let grid = linspace(mhz(lo), mhz(hi), cfg.points);
    let options = SweepOptions {
        optimize: cfg.optimize,
        pin_field: s.bounds.b_field[1] == 0.0,
        branch: s.branch,
    };
    let sampler = s.sampler.unwrap_or_default();
    let rows = sweep_coupling(&s.system, s.cavity.kappa_i, &grid, &options, &sampler)?;
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(to_mhz(r.kappa_ex)),
                num(to_mhz(r.delta_c_opt)),
                num(to_mhz(r.delta_a_opt)),
                num(r.b_opt),
                num(r.fidelity_opt),
                num(r.efficiency_opt),
                num(r.fidelity_0),
                num(r.efficiency_0),
                u8::from(r.analytic).to_string(),
            ]
        })
        .collect();
    write_table(
        sink(out)?,
        &[
            "kappa_ex_MHz",
            "delta_c_opt_MHz",
            "delta_a_opt_MHz",
            "B_opt_G",
            "F_opt",
            "eta_opt",
            "F_0",
            "eta_0",
            "analytic",
        ],
        &rows,
    )
}

pub fn optimize(s: &Scenario, out: Option<&Path>) -> CliResult<String> {
    let sampler = s.sampler.unwrap_or_default();
    let r = optimize_asymmetric(&s.system, &s.cavity, &s.bounds, &sampler)?;
    let mut report = String::new();
    let _ = writeln!(report, "delta_c_opt = {:.6} kHz", to_khz(r.delta_c_opt));
    let _ = writeln!(report, "delta_a_opt = {:.6} MHz", to_mhz(r.delta_a_opt));
    let _ = writeln!(report, "B_opt       = {:.6} G", r.b_opt);
    let _ = writeln!(report, "mean_F      = {:.6}", r.mean_fidelity);
    let _ = writeln!(report, "sigma_F     = {:.6}", r.sigma_fidelity);
    let _ = writeln!(report, "mean_eta    = {:.6}", r.mean_efficiency);
    let _ = writeln!(report, "sigma_eta   = {:.6}", r.sigma_efficiency);
    aggregate_lines(&mut report, "baseline ", &r.baseline);
    let _ = writeln!(
        report,
        "evaluations = {}, converged = {}",
        r.evaluations, r.converged
    );
    if let Some(path) = out {
        let header = [
            "delta_c_opt_MHz",
            "delta_a_opt_MHz",
            "B_opt_G",
            "F_mean",
            "F_sigma",
            "eta_mean",
            "eta_sigma",
            "F_0_mean",
            "F_0_sigma",
            "eta_0_mean",
            "eta_0_sigma",
        ];
        let row = vec![
            num(to_mhz(r.delta_c_opt)),
            num(to_mhz(r.delta_a_opt)),
            num(r.b_opt),
            num(r.mean_fidelity),
            num(r.sigma_fidelity),
            num(r.mean_efficiency),
            num(r.sigma_efficiency),
            num(r.baseline.mean_fidelity),
            num(r.baseline.sigma_fidelity),
            num(r.baseline.mean_efficiency),
            num(r.baseline.sigma_efficiency),
        ];
        write_table(sink(Some(path))?, &header, &[row])?;
        let hp = histogram_path(path);
        write_histogram(&hp, &r.histogram)?;
        let _ = writeln!(report, "histogram   -> {}", hp.display());
    }
    Ok(report)
}

struct TableRow {
    table: &'static str,
    column: String,
    quantity: &'static str,
    unit: &'static str,
    value: f64,
}

fn table_rows() -> CliResult<Vec<TableRow>> {
    let mut rows = Vec::new();
    let mut push = |table, column: &str, quantity, unit, value| {
        rows.push(TableRow {
            table,
            column: column.to_string(),
            quantity,
            unit,
            value,
        })
    };

    // Symmetric Yb⁺ landmarks with γ = 2π×10 MHz.
    for (column, g, ki, scale, unit) in [
        ("conventional", mhz(5.0), mhz(0.09), 1e3, "kHz"),
        ("fiber", mhz(70.0), mhz(30.0), 1.0, "MHz"),
    ] {
        let sys = LambdaSystem::symmetric(g / 3f64.sqrt(), mhz(10.0))?;
        let lm = landmark_parameters(ki, &sys)?;
        let f = |w: f64| to_mhz(w) * scale;
        push("landmarks", column, "kappa_ex_I", unit, f(lm.kappa_ex_i));
        push("landmarks", column, "kappa_ex_II", unit, f(lm.kappa_ex_ii));
        push(
            "landmarks",
            column,
            "kappa_ex_III",
            unit,
            lm.kappa_ex_iii.map_or(f64::NAN, f),
        );
        push("landmarks", column, "delta_c_I", unit, f(lm.delta_c_i));
        push(
            "landmarks",
            column,
            "delta_a_I",
            "MHz",
            to_mhz(lm.delta_a_i),
        );
        push(
            "landmarks",
            column,
            "F_III",
            "",
            lm.f_iii.unwrap_or(f64::NAN),
        );
        push("landmarks", column, "eta_II", "", lm.eta_ii);
        push(
            "landmarks",
            column,
            "eta_III",
            "",
            lm.eta_iii.unwrap_or(f64::NAN),
        );
        push("landmarks", column, "C_i", "", lm.intrinsic_cooperativity);
    }

    for ion in [IonId::Yb171, IonId::Ca40] {
        let table = "cavity";
        for flavor in [CavityFlavor::Conventional, CavityFlavor::Fiber] {
            let p = Preset::new(ion, flavor);
            let column = format!("{ion} {flavor:?}").to_lowercase();
            let (cav, finesse) = cavity_from_mirrors(&p.mirrors)?;
            let (scale, unit) = match flavor {
                CavityFlavor::Conventional => (1e3, "kHz"),
                CavityFlavor::Fiber => (1.0, "MHz"),
            };
            push(table, &column, "length", "mm", p.mirrors.length_m * 1e3);
            push(table, &column, "T1", "ppm", p.mirrors.t1_ppm);
            push(table, &column, "T2+L", "ppm", p.mirrors.t2_plus_l_ppm);
            push(table, &column, "finesse", "", finesse);
            push(
                table,
                &column,
                "kappa_ex",
                unit,
                to_mhz(cav.kappa_ex) * scale,
            );
            push(table, &column, "kappa_i", unit, to_mhz(cav.kappa_i) * scale);
            push(
                table,
                &column,
                "g_down",
                "MHz",
                to_mhz(p.system.g_down.norm()),
            );
            push(table, &column, "g_up", "MHz", to_mhz(p.system.g_up.norm()));
            push(table, &column, "gamma", "MHz", to_mhz(p.system.gamma));
            push(table, &column, "C_t", "", p.cooperativity());
            push(table, &column, "gate_time", "us", p.gate_time() * 1e6);
        }
    }
    for ion in [IonId::Ba138, IonId::Ca40] {
        let data = ion_preset(ion);
        if let Some(purcell) = data.purcell_rate {
            let ratio = postselected_efficiency(1.0, purcell, data.gamma_other)?;
            push(
                "postselection",
                &ion.to_string().to_lowercase(),
                "eta_ratio",
                "",
                ratio,
            );
        }
    }
    Ok(rows)
}

pub fn tables(out: Option<&Path>) -> CliResult<String> {
    let rows = table_rows()?;
    let mut report = String::new();
    let mut current = ("", String::new());
    for r in &rows {
        if (r.table, &r.column) != (current.0, &current.1) {
            let _ = writeln!(report, "\n[{} / {}]", r.table, r.column);
            current = (r.table, r.column.clone());
        }
        let _ = writeln!(report, "  {:<24} {:>14.6} {}", r.quantity, r.value, r.unit);
    }
    if let Some(path) = out {
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.table.to_string(),
                    r.column.clone(),
                    r.quantity.to_string(),
                    r.unit.to_string(),
                    num(r.value),
                ]
            })
            .collect();
        write_table(
            sink(Some(path))?,
            &["table", "column", "quantity", "unit", "value"],
            &csv_rows,
        )?;
    }
    Ok(report)
}

/// Runs the scenario's own case when one is configured, otherwise the
/// randomized suite. Fails (exit 2) when the tolerances are exceeded.
pub fn oracle_check(
    s: Option<&Scenario>,
    section: &OracleSection,
    out: Option<&Path>,
) -> CliResult<String> {
    let config = section.config();
    let mut report = String::new();
    if let Some(w) = config.validity_warning() {
        let _ = writeln!(report, "warning: {w}");
    }
    let suite = match s {
        Some(s) => {
            let case = OracleCase {
                state: s.state.unwrap_or_else(default_state),
                system: s.system,
                cavity: s.cavity,
                drive: effective_drive(s)?,
            };
            SuiteReport::from_results(vec![case.compare(&config)?])
        }
        None => equivalence_suite(section.cases, section.seed, &config)?,
    };
    let _ = writeln!(report, "cases                  = {}", suite.results.len());
    let _ = writeln!(
        report,
        "max |dP|               = {:.3e} (limit {:.1e})",
        suite.max_deviation, section.tolerance
    );
    let _ = writeln!(
        report,
        "max conservation error = {:.3e} (limit {CONSERVATION_LIMIT:.1e})",
        suite.max_conservation
    );
    if let Some(path) = out {
        write_oracle_csv(path, &suite.results)?;
    }
    if suite.passed(section.tolerance, CONSERVATION_LIMIT) {
        let _ = writeln!(report, "PASS");
        Ok(report)
    } else {
        print!("{report}");
        Err(CliError::CheckFailed("oracle check FAILED".into()))
    }
}

fn write_oracle_csv(path: &Path, results: &[CaseResult]) -> CliResult<()> {
    let rows: Vec<Vec<String>> = results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                num(r.closed.p_dark),
                num(r.closed.p_bright),
                num(r.oracle.p_dark),
                num(r.oracle.p_bright),
                num(r.oracle.p_loss_intrinsic),
                num(r.oracle.p_loss_spontaneous),
                num(r.deviation),
                num(r.oracle.conservation_residual),
            ]
        })
        .collect();
    write_table(
        sink(Some(path))?,
        &[
            "case",
            "P_D_closed",
            "P_B_closed",
            "P_D_oracle",
            "P_B_oracle",
            "P_loss_intrinsic",
            "P_loss_spontaneous",
            "max_abs_dP",
            "conservation_residual",
        ],
        &rows,
    )
}

pub fn preset(ion: &str, flavor: CavityFlavor) -> CliResult<String> {
    let p = Preset::new(ion.parse()?, flavor);
    toml::to_string(&crate::config::ScenarioConfig::from_preset(&p))
        .map_err(|e| CliError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_cover_all_tables() {
        let rows = table_rows().unwrap();
        for t in ["landmarks", "cavity", "postselection"] {
            assert!(rows.iter().any(|r| r.table == t));
        }
        assert!(rows.iter().all(|r| r.value.is_finite()));
    }
}
