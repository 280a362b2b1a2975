//! Brute-force recomputation of observer quantities straight from a report
//! log. Deliberately shares no code with `redcrawl::observer`.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use redcrawl::{Color, MonitorReport, NodeId};

pub struct LogView<'a> {
    reports: Vec<&'a MonitorReport>,
}

fn slot(c: Color) -> usize {
    match c {
        Color::Red => 0,
        Color::Blue => 1,
    }
}

impl<'a> LogView<'a> {
    pub fn new(log: &'a [MonitorReport]) -> Self {
        LogView {
            reports: log.iter().collect(),
        }
    }

    /// The log with `masked`'s own report removed.
    pub fn without(log: &'a [MonitorReport], masked: NodeId) -> Self {
        LogView {
            reports: log.iter().filter(|r| r.target != masked).collect(),
        }
    }

    pub fn monitored(&self) -> BTreeMap<NodeId, Color> {
        self.reports.iter().map(|r| (r.target, r.true_color)).collect()
    }

    pub fn observed(&self) -> BTreeSet<NodeId> {
        let mut s = BTreeSet::new();
        for r in &self.reports {
            s.insert(r.target);
            s.extend(r.neighbors.iter().copied());
        }
        s
    }

    pub fn edges(&self) -> BTreeSet<(NodeId, NodeId)> {
        let mut s = BTreeSet::new();
        for r in &self.reports {
            for &u in &r.neighbors {
                s.insert((r.target.min(u), r.target.max(u)));
            }
        }
        s
    }

    pub fn candidates(&self) -> BTreeSet<NodeId> {
        let m = self.monitored();
        self.observed().into_iter().filter(|v| !m.contains_key(v)).collect()
    }

    /// `[speaker][said][subject]` over statements whose subject is monitored.
    pub fn verified(&self) -> [[[u32; 2]; 2]; 2] {
        let m = self.monitored();
        let mut c = [[[0u32; 2]; 2]; 2];
        for r in &self.reports {
            for s in &r.statements {
                if let Some(&subject) = m.get(&s.subject) {
                    c[slot(r.true_color)][slot(s.said)][slot(subject)] += 1;
                }
            }
        }
        c
    }

    /// The nine features of `v` recomputed from scratch.
    pub fn features(&self, v: NodeId) -> [f64; 9] {
        let m = self.monitored();
        let counts = self.verified();
        let trust = |speaker: Color, said: Color| {
            let cell = counts[slot(speaker)][slot(said)];
            (cell[0] as f64 + 1.0) / (cell[0] as f64 + cell[1] as f64 + 2.0)
        };
        // monitored nodes that reported v as a neighbor
        let speakers: Vec<&MonitorReport> = self
            .reports
            .iter()
            .copied()
            .filter(|r| r.neighbors.contains(&v))
            .collect();
        let red_nbrs: Vec<&MonitorReport> = speakers
            .iter()
            .copied()
            .filter(|r| r.true_color == Color::Red)
            .collect();
        let f1 = red_nbrs.len() as f64;
        let f2 = (speakers.len() - red_nbrs.len()) as f64;
        let mut f3 = 0.0;
        for i in 0..red_nbrs.len() {
            for j in i + 1..red_nbrs.len() {
                if red_nbrs[i].neighbors.contains(&red_nbrs[j].target) {
                    f3 += 1.0;
                }
            }
        }
        let mut f = [f1, f2, f3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut trust_sum = 0.0;
        let mut said_count = 0usize;
        for r in &speakers {
            let s = r.statements.iter().find(|s| s.subject == v).expect("one statement per neighbor");
            assert_eq!(m[&r.target], r.true_color);
            if s.said == Color::Red {
                f[3] += 1.0;
            }
            let k = 4 + 2 * slot(r.true_color) + slot(s.said);
            f[k] += 1.0;
            trust_sum += trust(r.true_color, s.said);
            said_count += 1;
        }
        f[8] = if said_count == 0 {
            0.5
        } else {
            trust_sum / said_count as f64
        };
        f
    }
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
