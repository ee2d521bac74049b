//! Data-file writers: per-CV CSV profiles, troubled-cell logs, structured
//! 2D field files and density matrices, and line-delimited run logs.

use crate::error::Result;
use crate::mesh::{SvGrid1D, SvGrid2D};
use crate::physics::{conserved_to_primitive, Model, MAX_COMP};
use crate::solver::{RunLog, SolutionField1D, SolutionField2D};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Conserved component labels used in CSV headers.
pub fn component_names(model: &Model) -> &'static [&'static str] {
    match model {
        Model::Advection1D { .. } | Model::Advection2D { .. } => &["u"],
        Model::Euler1D { .. } => &["rho", "momx", "energy"],
        Model::Euler2D { .. } => &["rho", "momx", "momy", "energy"],
    }
}

/// One row per CV: `x,cv_width,<components...>[,exact_<components...>]`.
pub fn write_solution_1d(
    path: &Path,
    grid: &SvGrid1D,
    model: &Model,
    field: &SolutionField1D,
    exact: Option<&[f64]>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let names = component_names(model);
    let ncomp = names.len();
    write!(w, "x,cv_width")?;
    for n in names {
        write!(w, ",{n}")?;
    }
    if exact.is_some() {
        for n in names {
            write!(w, ",exact_{n}")?;
        }
    }
    writeln!(w)?;
    for cv in 0..grid.n_cv() {
        write!(w, "{:.12e},{:.12e}", grid.cv_centers[cv], grid.cv_widths[cv])?;
        for c in 0..ncomp {
            write!(w, ",{:.12e}", field.data[cv * ncomp + c])?;
        }
        if let Some(e) = exact {
            for c in 0..ncomp {
                write!(w, ",{:.12e}", e[cv * ncomp + c])?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One row per flagged CV per step: `step,t,cv_index,flag`.
pub fn write_troubled_csv(path: &Path, log: &RunLog) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "step,t,cv_index,flag")?;
    if let Some(records) = &log.troubled_cells {
        for rec in records {
            for &cv in &rec.cells {
                writeln!(w, "{},{:.9e},{},1", rec.step, rec.t, cv)?;
            }
        }
    }
    Ok(())
}

/// Structured 2D field: `# nx ny` header then `x y rho u v p` rows
/// (primitives), x fastest.
pub fn write_field_2d(
    path: &Path,
    grid: &SvGrid2D,
    model: &Model,
    field: &SolutionField2D,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let (nx, ny) = (grid.x.n_cv(), grid.y.n_cv());
    let ncomp = model.n_comp();
    writeln!(w, "# {nx} {ny}")?;
    let mut prim = [0.0; MAX_COMP];
    for iy in 0..ny {
        for ix in 0..nx {
            let u = &field.data[(iy * nx + ix) * ncomp..][..ncomp];
            conserved_to_primitive(model, u, &mut prim)?;
            writeln!(
                w,
                "{:.9e} {:.9e} {:.9e} {:.9e} {:.9e} {:.9e}",
                grid.x.cv_centers[ix],
                grid.y.cv_centers[iy],
                prim[0],
                prim[1],
                if ncomp > 3 { prim[2] } else { 0.0 },
                prim[ncomp - 1],
            )?;
        }
    }
    Ok(())
}

/// Contour-ready density matrix: `# nx ny` header, then ny rows of nx
/// density values.
pub fn write_density_matrix(path: &Path, grid: &SvGrid2D, field: &SolutionField2D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let (nx, ny) = (grid.x.n_cv(), grid.y.n_cv());
    let ncomp = field.n_comp;
    writeln!(w, "# {nx} {ny}")?;
    for iy in 0..ny {
        for ix in 0..nx {
            if ix > 0 {
                write!(w, " ")?;
            }
            write!(w, "{:.9e}", field.data[(iy * nx + ix) * ncomp])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Line-delimited step records.
pub fn write_runlog(path: &Path, log: &RunLog) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    log.write_jsonl(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{cv_averages_1d, cv_averages_2d, preset_def, Preset};
    use crate::mesh::{build_grid_1d, build_grid_2d};
    use crate::solver::{StepRecord, TroubledRecord};

    #[test]
    fn solution_csv_has_one_row_per_cv() {
        let def = preset_def(Preset::Sod1d).unwrap();
        let grid = build_grid_1d(-5.0, 5.0, 10, 3).unwrap();
        let data = cv_averages_1d(&grid, 3, &def.initial, 0.0);
        let field = SolutionField1D { data, n_comp: 3, t: 0.0 };
        let dir = std::env::temp_dir().join("svweno_out_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sol.csv");
        write_solution_1d(&path, &grid, &def.model, &field, None).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 30);
        assert!(text.starts_with("x,cv_width,rho,momx,energy"));
    }

    #[test]
    fn field_2d_row_count() {
        let def = preset_def(Preset::Riemann2d1).unwrap();
        let grid = build_grid_2d(0.0, 1.0, 0.0, 1.0, 4, 4, 3).unwrap();
        let data = cv_averages_2d(&grid, 4, &def.initial, 0.0);
        let field = SolutionField2D { data, n_comp: 4, t: 0.0 };
        let dir = std::env::temp_dir().join("svweno_out_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.dat");
        write_field_2d(&path, &grid, &def.model, &field).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 144);
        assert!(text.starts_with("# 12 12"));
        write_density_matrix(&dir.join("density.dat"), &grid, &field).unwrap();
        let text = std::fs::read_to_string(dir.join("density.dat")).unwrap();
        assert_eq!(text.lines().count(), 1 + 12);
    }

    #[test]
    fn troubled_csv_lists_flagged_cells() {
        let log = RunLog {
            steps: vec![StepRecord {
                step: 1,
                t: 0.1,
                dt: 0.1,
                clipped: false,
                troubled_percent: 10.0,
                trace_fallbacks: 0,
            }],
            troubled_cells: Some(vec![TroubledRecord {
                step: 1,
                t: 0.1,
                cells: vec![3, 7],
            }]),
        };
        let dir = std::env::temp_dir().join("svweno_out_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("troubled.csv");
        write_troubled_csv(&path, &log).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,") && lines[1].ends_with(",3,1"));
    }
}
