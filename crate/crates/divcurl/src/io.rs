//! Field dumps: a text header line `n h component_count`, then the values in
//! row-major cell order with the components of a cell adjacent. The text
//! form writes one cell per line, the binary form little-endian `f64`s.

use std::fs;
use std::io::{self, BufRead, BufWriter, Read, Write};
use std::path::Path;

use divcurl_core::{Grid, ScalarField, VectorField};

/// Cell-major values with `components` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub n: usize,
    pub h: f64,
    pub components: usize,
    pub values: Vec<f64>,
}

impl FieldDump {
    pub fn from_scalar(s: &ScalarField) -> Self {
        Self {
            n: s.grid().n(),
            h: s.grid().h(),
            components: 1,
            values: s.values().to_vec(),
        }
    }

    pub fn from_vector(v: &VectorField) -> Self {
        let g = v.grid();
        let values = (0..g.cell_count()).flat_map(|i| v.at(i)).collect();
        Self {
            n: g.n(),
            h: g.h(),
            components: 3,
            values,
        }
    }

    pub fn to_vector(&self) -> io::Result<VectorField> {
        if self.components != 3 {
            return Err(invalid(format!("expected 3 components, found {}", self.components)));
        }
        let g = Grid::new(self.n).map_err(|e| invalid(e.to_string()))?;
        let comps = [0, 1, 2].map(|c| self.values.iter().skip(c).step_by(3).copied().collect());
        Ok(VectorField::from_components(g, comps))
    }

    fn header(&self) -> String {
        format!("{} {:e} {}\n", self.n, self.h, self.components)
    }

    fn expected_len(&self) -> usize {
        self.n * self.n * self.n * self.components
    }

    pub fn write_text(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(self.header().as_bytes())?;
        for cell in self.values.chunks(self.components) {
            let line: Vec<String> = cell.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()
    }

    pub fn write_binary(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(self.header().as_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    /// Reads either form, told apart by the file extension `.bin`.
    pub fn read(path: &Path) -> io::Result<Self> {
        let mut r = io::BufReader::new(fs::File::open(path)?);
        let mut line = String::new();
        r.read_line(&mut line)?;
        let mut dump = parse_header(&line)?;
        if path.extension().is_some_and(|e| e == "bin") {
            let mut bytes = Vec::new();
            r.read_to_end(&mut bytes)?;
            if bytes.len() % 8 != 0 {
                return Err(invalid("truncated binary payload".into()));
            }
            dump.values = bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
        } else {
            let mut text = String::new();
            r.read_to_string(&mut text)?;
            dump.values = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|e| invalid(format!("bad value `{t}`: {e}"))))
                .collect::<io::Result<_>>()?;
        }
        if dump.values.len() != dump.expected_len() {
            return Err(invalid(format!(
                "expected {} values, found {}",
                dump.expected_len(),
                dump.values.len()
            )));
        }
        Ok(dump)
    }
}

fn parse_header(line: &str) -> io::Result<FieldDump> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let [n, h, c] = parts[..] else {
        return Err(invalid(format!("bad header `{}`", line.trim_end())));
    };
    let field = |t: &str| invalid(format!("bad header field `{t}`"));
    Ok(FieldDump {
        n: n.parse().map_err(|_| field(n))?,
        h: h.parse().map_err(|_| field(h))?,
        components: c.parse().map_err(|_| field(c))?,
        values: Vec::new(),
    })
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_dump_reads_back() {
        let g = Grid::new(4).unwrap();
        let v = VectorField::sample(g, |p| [p[0], -p[1], p[2] * 3.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let dump = FieldDump::from_vector(&v);
        for name in ["u.bin", "u.txt"] {
            let path = dir.path().join(name);
            if name.ends_with("bin") {
                dump.write_binary(&path).unwrap();
            } else {
                dump.write_text(&path).unwrap();
            }
            let back = FieldDump::read(&path).unwrap();
            assert_eq!(back, dump);
            assert_eq!(back.to_vector().unwrap().components(), v.components());
        }
        let text = fs::read_to_string(dir.path().join("u.txt")).unwrap();
        assert_eq!(text.lines().next().unwrap(), "4 2.5e-1 3");
        assert_eq!(text.lines().nth(1).unwrap(), "1.25e-1 -1.25e-1 3.75e-1");
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "4 0.25\n1 2 3\n").unwrap();
        assert!(FieldDump::read(&path).is_err());
        fs::write(&path, "4 0.25 1\n1 2 3\n").unwrap();
        assert!(FieldDump::read(&path).is_err());
    }
}
