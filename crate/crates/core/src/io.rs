//! CSV formats for traces, processed displacement, classification matrices
//! and p_e curves, plus atomic file replacement.

use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::classification::{
    ClassLabel, ClassificationMatrix, DriftThresholds, RelativeDisplacementModel,
};
use crate::error::{Error, Result};
use crate::kinematics::{AccelTrace, DisplacementEstimate};
use crate::scenario::PeCurve;

/// Allowed deviation of a timestamp from the uniform grid, in sample
/// intervals.
pub const GRID_JITTER: f64 = 1e-6;

#[derive(Deserialize)]
struct TraceRow {
    t: f64,
    ax: f64,
}

/// Acceleration trace with its timestamps, as read from `t,ax` CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedTrace {
    pub times: Vec<f64>,
    pub trace: AccelTrace,
}

pub fn read_trace<R: Read>(reader: R) -> Result<TimedTrace> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "ax"] {
        return Err(Error::Parse(format!(
            "trace header must be `t,ax`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for row in rdr.deserialize::<TraceRow>() {
        let row = row?;
        times.push(row.t);
        samples.push(row.ax);
    }
    if times.len() < 2 {
        return Err(Error::InvalidTrace(format!(
            "need at least 2 samples, got {}",
            times.len()
        )));
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTrace("timestamps must increase".into()));
    }
    for (k, &t) in times.iter().enumerate() {
        let expected = times[0] + k as f64 * dt;
        if (t - expected).abs() > GRID_JITTER * dt {
            return Err(Error::InvalidTrace(format!(
                "row {} at t = {t} is off the uniform {dt} s grid",
                k + 1
            )));
        }
    }
    Ok(TimedTrace {
        times,
        trace: AccelTrace::new(samples, dt)?,
    })
}

pub fn read_trace_file(path: &Path) -> Result<TimedTrace> {
    read_trace(std::fs::File::open(path)?)
}

/// `t,ax` with sample `i` at `t = i·Δt`.
pub fn write_trace<W: Write>(mut w: W, samples: &[f64], dt: f64) -> Result<()> {
    writeln!(w, "t,ax")?;
    for (k, a) in samples.iter().enumerate() {
        writeln!(w, "{:?},{a:?}", (k + 1) as f64 * dt)?;
    }
    Ok(())
}

/// `i,t,v,s,s_zupt,sigma_s,sigma_s_zupt`, one row per sample in the
/// estimate. Missing columns are written empty.
pub fn write_displacement<W: Write>(
    mut w: W,
    times: &[f64],
    est: &DisplacementEstimate,
) -> Result<()> {
    let n = est.len();
    if times.len() < n {
        return Err(Error::LengthMismatch(format!(
            "{} timestamps for {n} samples",
            times.len()
        )));
    }
    let cell = |col: &Option<Vec<f64>>, k: usize| {
        col.as_ref().map(|c| format!("{:?}", c[k])).unwrap_or_default()
    };
    writeln!(w, "i,t,v,s,s_zupt,sigma_s,sigma_s_zupt")?;
    for (k, t) in times[..n].iter().enumerate() {
        writeln!(
            w,
            "{},{:?},{:?},{:?},{},{},{}",
            k + 1,
            t,
            est.velocity[k],
            est.displacement[k],
            cell(&est.displacement_zupt, k),
            cell(&est.sigma_s, k),
            cell(&est.sigma_s_zupt, k),
        )?;
    }
    Ok(())
}

/// 3×3 matrix with a `pe` line; the model is echoed in comments.
pub fn write_matrix<W: Write>(
    mut w: W,
    m: &ClassificationMatrix,
    model: &RelativeDisplacementModel,
    th: &DriftThresholds,
) -> Result<()> {
    writeln!(
        w,
        "# mu_d = {} m, sigma_d = {} m, sigma_x = {} m",
        model.mu_d, model.sigma_d, model.sigma_x
    )?;
    writeln!(
        w,
        "# d0 = {} m, d1 = {} m, floor_height = {} m",
        th.d0(),
        th.d1(),
        th.floor_height()
    )?;
    writeln!(w, "# rows: true label, columns: measured label")?;
    writeln!(w, "true,IO,LS,CP,prior")?;
    for t in ClassLabel::ALL {
        let row = m.p[t.index()];
        writeln!(
            w,
            "{t},{:?},{:?},{:?},{:?}",
            row[0],
            row[1],
            row[2],
            m.priors[t.index()]
        )?;
    }
    writeln!(w, "pe,{:?}", m.pe)?;
    Ok(())
}

/// `T_seconds,pe` with sensor, hazard, mode and Δt in header comments.
/// Points whose evaluation failed are written as `NaN`.
pub fn write_pe_curve<W: Write>(mut w: W, curve: &PeCurve, dt: f64) -> Result<()> {
    writeln!(w, "# sensor: {}", curve.sensor)?;
    writeln!(w, "# hazard: {}", curve.hazard)?;
    writeln!(w, "# mode: {}", curve.mode)?;
    writeln!(w, "# dt: {dt}")?;
    writeln!(w, "T_seconds,pe")?;
    for (t, pe) in &curve.points {
        writeln!(w, "{t:?},{pe:?}")?;
    }
    Ok(())
}

/// Writes through a temporary file in the destination directory and
/// renames it into place, so readers never see a partial file.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::double_integrate;

    #[test]
    fn trace_round_trip() {
        let samples = vec![0.1, -0.2, 0.30000000000000004, 4e-7];
        let mut buf = Vec::new();
        write_trace(&mut buf, &samples, 0.01).unwrap();
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.trace.samples(), samples.as_slice());
        assert!((back.trace.dt() - 0.01).abs() < 1e-15);
        assert_eq!(back.times[0], 0.01);
    }

    #[test]
    fn jittered_grid_rejected() {
        let text = "t,ax\n0.00,0\n0.01,0\n0.0201,0\n0.03,0\n";
        assert!(matches!(
            read_trace(text.as_bytes()),
            Err(Error::InvalidTrace(_))
        ));
        let ok = "t,ax\n0.00,0\n0.01,0\n0.02000000001,0\n0.03,0\n";
        assert!(read_trace(ok.as_bytes()).is_ok());
    }

    #[test]
    fn header_checked() {
        assert!(read_trace("time,a\n0,0\n1,0\n".as_bytes()).is_err());
        assert!(read_trace("t,ax\n0,0\n".as_bytes()).is_err());
    }

    #[test]
    fn displacement_columns() {
        let est = double_integrate(&AccelTrace::unbiased(vec![1.0, 1.0], 1.0).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_displacement(&mut buf, &[1.0, 2.0], &est).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "i,t,v,s,s_zupt,sigma_s,sigma_s_zupt\n1,1.0,1.0,1.0,,,\n2,2.0,2.0,3.0,,,\n"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.csv");
        write_atomic(&path, |w| Ok(writeln!(w, "first")?)).unwrap();
        write_atomic(&path, |w| Ok(writeln!(w, "second")?)).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        assert_eq!(
            std::fs::read_dir(dir.path().join("sub")).unwrap().count(),
            1
        );
    }
}
