//! Daily contact networks: sparse symmetric maps of 10-minute contact
//! units per dyad, capped at 38 units (6h40m) per day.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::stub_matcher::MultiLayer;

/// Maximum 10-minute units between any two students in one day.
pub const MAX_DAILY_UNITS: u8 = 38;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactNetwork {
    n: usize,
    /// Both directions of every dyad, sorted by partner id.
    adjacency: Vec<Vec<(u32, u8)>>,
    total_units: u64,
    clamped_dyads: usize,
}

impl ContactNetwork {
    pub fn empty(n: usize) -> Self {
        ContactNetwork {
            n,
            adjacency: vec![Vec::new(); n],
            total_units: 0,
            clamped_dyads: 0,
        }
    }

    /// Build from per-dyad unit counts, clamping at the daily cap.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = ((u32, u32), u32)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        let mut total = 0u64;
        let mut clamped = 0usize;
        for ((i, j), units) in entries {
            debug_assert!(i != j, "contact networks have a zero diagonal");
            let units = if units > MAX_DAILY_UNITS as u32 {
                clamped += 1;
                MAX_DAILY_UNITS
            } else {
                units as u8
            };
            if units == 0 {
                continue;
            }
            adjacency[i as usize].push((j, units));
            adjacency[j as usize].push((i, units));
            total += units as u64;
        }
        for row in &mut adjacency {
            row.sort_unstable_by_key(|&(p, _)| p);
        }
        ContactNetwork {
            n,
            adjacency,
            total_units: total,
            clamped_dyads: clamped,
        }
    }

    pub fn from_multilayer(layer: &MultiLayer) -> Self {
        Self::from_entries(
            layer.n(),
            layer.entries().map(|(key, m)| (key, m as u32)),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_units(&self) -> u64 {
        self.total_units
    }

    /// Dyads whose sum exceeded the cap during construction.
    pub fn clamped_dyads(&self) -> usize {
        self.clamped_dyads
    }

    pub fn partners(&self, i: usize) -> &[(u32, u8)] {
        &self.adjacency[i]
    }

    pub fn units(&self, i: u32, j: u32) -> u8 {
        self.adjacency[i as usize]
            .binary_search_by_key(&j, |&(p, _)| p)
            .map(|idx| self.adjacency[i as usize][idx].1)
            .unwrap_or(0)
    }

    pub fn dyad_count(&self) -> usize {
        self.adjacency.iter().map(|r| r.len()).sum::<usize>() / 2
    }

    pub fn mean_partner_count(&self) -> f64 {
        self.adjacency.iter().map(|r| r.len()).sum::<usize>() as f64 / self.n as f64
    }

    /// Mean 10-minute units per dyad with any contact.
    pub fn mean_duration_units(&self) -> f64 {
        let dyads = self.dyad_count();
        if dyads == 0 {
            return 0.0;
        }
        self.total_units as f64 / dyads as f64
    }

    /// Sorted (i, j, units) triples with i < j.
    pub fn sorted_entries(&self) -> Vec<(u32, u32, u8)> {
        let mut out = Vec::with_capacity(self.dyad_count());
        for (i, row) in self.adjacency.iter().enumerate() {
            for &(j, units) in row {
                if (i as u32) < j {
                    out.push((i as u32, j, units));
                }
            }
        }
        out
    }
}

/// Entrywise sum of the break/lunch layer and the class layer, clamped at
/// the daily cap.
pub fn compose_day(break_lunch: &MultiLayer, class_layer: &ContactNetwork) -> ContactNetwork {
    assert_eq!(break_lunch.n(), class_layer.n(), "layer sizes differ");
    let mut units: std::collections::HashMap<(u32, u32), u32> = class_layer
        .sorted_entries()
        .into_iter()
        .map(|(i, j, u)| ((i, j), u as u32))
        .collect();
    for (key, m) in break_lunch.entries() {
        *units.entry(key).or_insert(0) += m as u32;
    }
    ContactNetwork::from_entries(break_lunch.n(), units)
}

/// Write `day n total_units` header plus sorted `i j multiplicity` lines.
pub fn write_contact_network(
    network: &ContactNetwork,
    day: u32,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{day} {} {}", network.n(), network.total_units())?;
    for (i, j, units) in network.sorted_entries() {
        writeln!(f, "{i} {j} {units}")?;
    }
    f.flush()?;
    Ok(())
}

pub fn load_contact_network(path: impl AsRef<Path>) -> Result<(u32, ContactNetwork)> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::invalid("empty network file"))??;
    let mut parts = header.split_whitespace();
    let parse_u64 = |s: Option<&str>, what: &str| -> Result<u64> {
        s.and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::invalid(format!("bad header field {what}")))
    };
    let day = parse_u64(parts.next(), "day")? as u32;
    let n = parse_u64(parts.next(), "n")? as usize;
    let expected_units = parse_u64(parts.next(), "total_units")?;
    let mut entries = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: idx + 2,
                message: format!("expected `i j multiplicity`, got {line:?}"),
            });
        }
        let i: u32 = fields[0].parse().map_err(|_| Error::Parse {
            line: idx + 2,
            message: "bad i".into(),
        })?;
        let j: u32 = fields[1].parse().map_err(|_| Error::Parse {
            line: idx + 2,
            message: "bad j".into(),
        })?;
        let units: u32 = fields[2].parse().map_err(|_| Error::Parse {
            line: idx + 2,
            message: "bad multiplicity".into(),
        })?;
        entries.push(((i, j), units));
    }
    let network = ContactNetwork::from_entries(n, entries);
    if network.total_units() != expected_units {
        return Err(Error::validation(format!(
            "header units {expected_units} disagree with entries {}",
            network.total_units()
        )));
    }
    Ok((day, network))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_empty_layers() {
        let bl = MultiLayer::empty(4, 10);
        let class = ContactNetwork::empty(4);
        let day = compose_day(&bl, &class);
        assert_eq!(day.total_units(), 0);
        assert_eq!(day.dyad_count(), 0);
    }

    #[test]
    fn compose_at_and_over_cap() {
        // 10 + 28 hits the cap exactly; 10 + 32 clamps with a warning count
        let class_28 = ContactNetwork::from_entries(2, [((0u32, 1u32), 28u32)]);
        let class_32 = ContactNetwork::from_entries(2, [((0, 1), 32)]);
        let mut bl = MultiLayer::empty(2, 10);
        for _ in 0..10 {
            bl.add_unit_for_tests(0, 1);
        }
        let exact = compose_day(&bl, &class_28);
        assert_eq!(exact.units(0, 1), 38);
        assert_eq!(exact.clamped_dyads(), 0);

        let clamped = compose_day(&bl, &class_32);
        assert_eq!(clamped.units(0, 1), 38);
        assert_eq!(clamped.clamped_dyads(), 1);
    }

    #[test]
    fn symmetry_and_zero_diagonal() {
        let net = ContactNetwork::from_entries(3, [((0, 1), 5), ((1, 2), 3)]);
        assert_eq!(net.units(0, 1), net.units(1, 0));
        assert_eq!(net.units(0, 0), 0);
        assert_eq!(net.total_units(), 8);
    }

    #[test]
    fn file_roundtrip() {
        let net = ContactNetwork::from_entries(5, [((0, 4), 7), ((1, 2), 38), ((0, 1), 1)]);
        let f = tempfile::NamedTempFile::new().unwrap();
        write_contact_network(&net, 3, f.path()).unwrap();
        let (day, back) = load_contact_network(f.path()).unwrap();
        assert_eq!(day, 3);
        assert_eq!(net, back);
    }
}
