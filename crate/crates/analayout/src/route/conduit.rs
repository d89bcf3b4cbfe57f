//! Conduit bundling: parallel same-layer segments that run close together
//! and overlap in span merge into one guide band for the detailed router.

use serde::{Deserialize, Serialize};

use crate::route::{Orientation, Segment, EPS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConduitConfig {
    /// Drawn width of one wire track.
    pub wire_width: f64,
    /// Gap between tracks inside a conduit.
    pub spacing: f64,
    /// Maximum cross-position distance for two segments to bundle.
    pub bundle_distance: f64,
}

impl Default for ConduitConfig {
    fn default() -> Self {
        Self {
            wire_width: 0.2,
            spacing: 0.2,
            bundle_distance: 1.0,
        }
    }
}

/// A bundle of parallel same-layer segments. `nets` lists one entry per
/// member track, so the width formula stays
/// `members * wire_width + (members - 1) * spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conduit {
    pub orientation: Orientation,
    pub layer: u8,
    pub span: (f64, f64),
    pub cross: f64,
    pub width: f64,
    pub nets: Vec<String>,
    pub members: Vec<Segment>,
}

impl Conduit {
    pub fn member_length(&self) -> f64 {
        self.members.iter().map(Segment::length).sum()
    }
}

fn spans_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0.max(b.0) <= a.1.min(b.1) + EPS
}

/// Unions same-orientation, same-layer segments whose cross positions sit
/// within the bundling distance and whose spans overlap. Bundling is
/// transitive; every input segment lands in exactly one conduit.
pub fn bundle_conduits(segments: &[Segment], cfg: &ConduitConfig) -> Vec<Conduit> {
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&segments[a], &segments[b]);
        sa.layer
            .cmp(&sb.layer)
            .then((sa.orientation == Orientation::Vertical).cmp(&(sb.orientation == Orientation::Vertical)))
            .then(sa.cross.total_cmp(&sb.cross))
            .then(sa.span.0.total_cmp(&sb.span.0))
            .then(sa.span.1.total_cmp(&sb.span.1))
            .then(sa.net.cmp(&sb.net))
    });

    // Union-find over the sorted order.
    let mut parent: Vec<usize> = (0..segments.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (k, &i) in order.iter().enumerate() {
        for &j in order.iter().skip(k + 1) {
            let (si, sj) = (&segments[i], &segments[j]);
            if si.layer != sj.layer || si.orientation != sj.orientation {
                continue;
            }
            if (si.cross - sj.cross).abs() > cfg.bundle_distance + EPS {
                continue;
            }
            if !spans_overlap(si.span, sj.span) {
                continue;
            }
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &i in &order {
        groups.entry(find(&mut parent, i)).or_default().push(i);
    }
    let mut conduits: Vec<Conduit> = groups
        .into_values()
        .map(|mut members| {
            members.sort_by(|&a, &b| {
                segments[a]
                    .cross
                    .total_cmp(&segments[b].cross)
                    .then(segments[a].span.0.total_cmp(&segments[b].span.0))
                    .then(segments[a].net.cmp(&segments[b].net))
            });
            let segs: Vec<Segment> = members.iter().map(|&i| segments[i].clone()).collect();
            let k = segs.len();
            let cross = segs.iter().map(|s| s.cross).sum::<f64>() / k as f64;
            let span = (
                segs.iter().map(|s| s.span.0).fold(f64::INFINITY, f64::min),
                segs.iter().map(|s| s.span.1).fold(f64::NEG_INFINITY, f64::max),
            );
            Conduit {
                orientation: segs[0].orientation,
                layer: segs[0].layer,
                span,
                cross,
                width: k as f64 * cfg.wire_width + (k - 1) as f64 * cfg.spacing,
                nets: segs.iter().map(|s| s.net.clone()).collect(),
                members: segs,
            }
        })
        .collect();
    conduits.sort_by(|a, b| {
        a.layer
            .cmp(&b.layer)
            .then(a.cross.total_cmp(&b.cross))
            .then(a.span.0.total_cmp(&b.span.0))
    });
    conduits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(net: &str, cross: f64, span: (f64, f64)) -> Segment {
        Segment {
            net: net.to_string(),
            orientation: Orientation::Horizontal,
            layer: 3,
            span,
            cross,
        }
    }

    #[test]
    fn close_overlapping_segments_merge() {
        let cfg = ConduitConfig {
            wire_width: 0.2,
            spacing: 0.2,
            bundle_distance: 0.5,
        };
        let out = bundle_conduits(
            &[seg("n1", 1.0, (0.0, 5.0)), seg("n2", 1.2, (2.0, 7.0))],
            &cfg,
        );
        assert_eq!(out.len(), 1);
        let c = &out[0];
        assert!((c.cross - 1.1).abs() < 1e-12);
        assert_eq!(c.nets, vec!["n1".to_string(), "n2".to_string()]);
        assert_eq!(c.span, (0.0, 7.0));
        assert!((c.width - (2.0 * 0.2 + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn disjoint_spans_stay_separate() {
        let cfg = ConduitConfig::default();
        let out = bundle_conduits(
            &[seg("n1", 1.0, (0.0, 2.0)), seg("n2", 1.0, (3.0, 5.0))],
            &cfg,
        );
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn singleton_width_is_one_wire() {
        let cfg = ConduitConfig::default();
        let out = bundle_conduits(&[seg("n1", 2.0, (0.0, 4.0))], &cfg);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].width, cfg.wire_width);
        assert_eq!(out[0].member_length(), 4.0);
    }

    #[test]
    fn lengths_are_conserved_across_bundling() {
        let cfg = ConduitConfig {
            bundle_distance: 0.8,
            ..ConduitConfig::default()
        };
        let segs = vec![
            seg("a", 0.0, (0.0, 3.0)),
            seg("b", 0.5, (1.0, 4.0)),
            seg("c", 1.1, (2.0, 6.0)),
            seg("d", 9.0, (0.0, 1.0)),
            Segment {
                net: "e".into(),
                orientation: Orientation::Vertical,
                layer: 2,
                span: (0.0, 2.5),
                cross: 0.2,
            },
        ];
        let total_in: f64 = segs.iter().map(Segment::length).sum();
        let out = bundle_conduits(&segs, &cfg);
        let total_out: f64 = out.iter().map(Conduit::member_length).sum();
        assert!((total_in - total_out).abs() < 1e-12);
        let member_count: usize = out.iter().map(|c| c.members.len()).sum();
        assert_eq!(member_count, segs.len());
        // Different layers never merge.
        assert!(out
            .iter()
            .all(|c| c.members.iter().all(|s| s.layer == c.layer)));
    }
}
