//! Plain CSV emitters. Floats carry 17 significant digits, so every value
//! round-trips exactly and output is byte-identical across runs.

use std::io::{self, Write};

use crate::evolution::PositionDistribution;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `t,j,prob`, one row per occupied position.
pub fn write_distributions<W: Write>(mut out: W, dists: &[PositionDistribution]) -> io::Result<()> {
    writeln!(out, "t,j,prob")?;
    for d in dists {
        for (j, p) in d.iter().filter(|&(_, p)| p != 0.0) {
            writeln!(out, "{},{},{}", d.time(), j, fmt_f64(p))?;
        }
    }
    Ok(())
}

/// `quantity,value`.
pub fn write_quantities<W: Write>(mut out: W, rows: &[(&str, f64)]) -> io::Result<()> {
    writeln!(out, "quantity,value")?;
    for (name, v) in rows {
        writeln!(out, "{name},{}", fmt_f64(*v))?;
    }
    Ok(())
}

/// A header line followed by rows of floats, with optional leading
/// non-float columns already rendered by the caller.
pub fn write_table<W: Write>(
    mut out: W,
    header: &str,
    rows: impl IntoIterator<Item = (String, Vec<f64>)>,
) -> io::Result<()> {
    writeln!(out, "{header}")?;
    for (prefix, values) in rows {
        let cells: Vec<String> = values.into_iter().map(fmt_f64).collect();
        if prefix.is_empty() {
            writeln!(out, "{}", cells.join(","))?;
        } else {
            writeln!(out, "{prefix},{}", cells.join(","))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.0 / 7.0, 1e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn quantities_layout() {
        let mut buf = Vec::new();
        write_quantities(&mut buf, &[("reflected", 0.2)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "quantity,value\nreflected,2.0000000000000001e-1\n"
        );
    }

    #[test]
    fn table_layout() {
        let mut buf = Vec::new();
        write_table(
            &mut buf,
            "branch,k,x",
            [("nu0".to_string(), vec![0.5, -1.0])],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "nu0,5.0000000000000000e-1,-1.0000000000000000e0"
        );
    }
}
