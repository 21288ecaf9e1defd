use std::io::{self, Write};

use super::Trajectory;

/// Writes the recorded samples as comma-separated columns: time, seed
/// envelope, real and imaginary parts of `c_1..c_5`, then cumulative dark,
/// bright, intrinsic-loss and free-space-loss probabilities.
pub fn write_trajectory<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    let (alpha_p, beta_p) = atomic_qubit(traj);
    write!(out, "t_s,seed")?;
    for k in 1..=5 {
        write!(out, ",re_c{k},im_c{k}")?;
    }
    writeln!(out, ",p_dark,p_bright,p_loss_intrinsic,p_loss_spontaneous")?;
    for s in &traj.samples {
        write!(out, "{:.8e},{:.8e}", s.t, s.seed)?;
        for c in &s.c {
            write!(out, ",{:.8e},{:.8e}", c.re, c.im)?;
        }
        let (dark, bright) = s.fluxes.ports(alpha_p, beta_p);
        writeln!(
            out,
            ",{:.8e},{:.8e},{:.8e},{:.8e}",
            dark, bright, s.fluxes.intrinsic, s.fluxes.spontaneous
        )?;
    }
    Ok(())
}

/// Recovers `(α', β')` up to a global phase from the seed coefficients
/// `(αα', αβ', βα', ββ')`.
fn atomic_qubit(traj: &Trajectory) -> (crate::C64, crate::C64) {
    let [aa, ab, ba, bb] = traj.drive;
    let (x, y) = if aa.norm_sqr() + ab.norm_sqr() >= ba.norm_sqr() + bb.norm_sqr() {
        (aa, ab)
    } else {
        (ba, bb)
    };
    let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
    (x / n, y / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CavityParams, EffectiveDetunings, JointQubitState, LambdaSystem};
    use crate::oracle::integrate_amplitudes;

    #[test]
    fn dump_has_header_and_rows() {
        let st = JointQubitState::from_angles(1.0, 0.0, 1.0, 0.0);
        let sys = LambdaSystem::symmetric(1.0, 1.0).unwrap();
        let cav = CavityParams::new(1.0, 0.0).unwrap();
        let traj = integrate_amplitudes(
            &st,
            &sys,
            &cav,
            &EffectiveDetunings::RESONANT,
            0.1,
            100.0,
            0.01,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 16);
        assert_eq!(lines.count(), traj.samples.len());
    }
}
