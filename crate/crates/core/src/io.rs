//! Field output: legacy-VTK structured points and flat CSV dumps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// Writes named fields sharing one grid as an ASCII legacy-VTK
/// STRUCTURED_POINTS dataset, one SCALARS block per field.
pub fn write_vtk<P: AsRef<Path>>(path: P, title: &str, fields: &[(&str, &ScalarField)]) -> Result<()> {
    let Some((_, first)) = fields.first() else {
        return Err(Error::Config("VTK dump needs at least one field".into()));
    };
    let grid = *first.grid();
    for (name, f) in fields {
        if *f.grid() != grid {
            return Err(Error::Config(format!("field {name} is on a different grid")));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or("fields"))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} 1", grid.nx(), grid.ny())?;
    writeln!(w, "ORIGIN {} {} 0", grid.origin()[0], grid.origin()[1])?;
    writeln!(w, "SPACING {} {} 1", grid.dx(), grid.dy())?;
    writeln!(w, "POINT_DATA {}", grid.n())?;
    for (name, f) in fields {
        writeln!(w, "SCALARS {} double 1", sanitize(name))?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for row in f.values().chunks(grid.nx()) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.9e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes one field as CSV rows `i,j,x,y,value`.
pub fn write_field_csv<P: AsRef<Path>>(path: P, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["i", "j", "x", "y", "value"])?;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            w.write_record(&[
                i.to_string(),
                j.to_string(),
                format!("{:.9e}", grid.x(i)),
                format!("{:.9e}", grid.y(j)),
                format!("{:.9e}", field.get(i, j)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// VTK data names must not contain whitespace.
fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}
