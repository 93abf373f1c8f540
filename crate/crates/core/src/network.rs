//! Route enumeration and leg-by-leg transmission between fill and surplus nodes.

use crate::scenario::Scenario;

const TOL: f64 = 1e-12;

/// One line of a route. `dir` is +1 when power moving from the surplus end
/// towards the fill end flows in the line's from→to direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub line: usize,
    pub dir: f64,
}

/// A simple path of lines, listed from the fill node towards the surplus node.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub fill: usize,
    pub surplus: usize,
    pub legs: Vec<Leg>,
    /// Position of this route within its (fill, leg count) group.
    pub index: usize,
    nodes: Vec<usize>,
}

impl Route {
    pub fn len(&self) -> usize {
        self.legs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.legs.is_empty()
    }

    /// Nodes visited from fill to surplus.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteTable {
    n_nodes: usize,
    max_legs: usize,
    /// `groups[fill][p - 1]` holds the routes of exactly `p` lines.
    groups: Vec<Vec<Vec<Route>>>,
}

impl RouteTable {
    /// Enumerates every simple path of at most `max_legs` lines between each
    /// ordered pair of nodes. `lines` lists `(from, to)` endpoints.
    pub fn from_topology(n_nodes: usize, lines: &[(usize, usize)], max_legs: usize) -> Self {
        let max_legs = max_legs.max(1);
        let mut incident = vec![Vec::new(); n_nodes];
        for (l, &(a, b)) in lines.iter().enumerate() {
            incident[a].push((l, b, -1.0));
            incident[b].push((l, a, 1.0));
        }
        // From a node u on the fill side, stepping along line l to v means
        // power flows v -> u. If u is the line's from-node, that is against
        // the line direction (dir -1); if u is the to-node it is with it.
        let mut groups = vec![vec![Vec::new(); max_legs]; n_nodes];
        for fill in 0..n_nodes {
            let mut path_nodes = vec![fill];
            let mut path_legs = Vec::new();
            let mut found = Vec::new();
            dfs(
                &incident,
                max_legs,
                &mut path_nodes,
                &mut path_legs,
                &mut found,
            );
            found.sort_by(|a: &(Vec<usize>, Vec<Leg>), b| {
                a.0.cmp(&b.0).then_with(|| {
                    let la: Vec<usize> = a.1.iter().map(|g| g.line).collect();
                    let lb: Vec<usize> = b.1.iter().map(|g| g.line).collect();
                    la.cmp(&lb)
                })
            });
            for (nodes, legs) in found {
                let p = legs.len();
                let group = &mut groups[fill][p - 1];
                group.push(Route {
                    fill,
                    surplus: *nodes.last().unwrap(),
                    legs,
                    index: group.len(),
                    nodes,
                });
            }
        }
        RouteTable {
            n_nodes,
            max_legs,
            groups,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn max_legs(&self) -> usize {
        self.max_legs
    }

    /// Routes into `fill` made of exactly `p` lines.
    pub fn group(&self, fill: usize, p: usize) -> &[Route] {
        &self.groups[fill][p - 1]
    }

    pub fn routes(&self) -> impl Iterator<Item = &Route> {
        self.groups.iter().flatten().flatten()
    }
}

fn dfs(
    incident: &[Vec<(usize, usize, f64)>],
    max_legs: usize,
    nodes: &mut Vec<usize>,
    legs: &mut Vec<Leg>,
    found: &mut Vec<(Vec<usize>, Vec<Leg>)>,
) {
    if legs.len() == max_legs {
        return;
    }
    let u = *nodes.last().unwrap();
    for &(line, v, dir) in &incident[u] {
        if nodes.contains(&v) {
            continue;
        }
        nodes.push(v);
        legs.push(Leg { line, dir });
        found.push((nodes.clone(), legs.clone()));
        dfs(incident, max_legs, nodes, legs, found);
        nodes.pop();
        legs.pop();
    }
}

/// Route table of a scenario's line topology; `max_legs` defaults to one
/// less than the node count.
pub fn enumerate_routes(s: &Scenario, max_legs: Option<usize>) -> RouteTable {
    let lines: Vec<(usize, usize)> = s.lines.iter().map(|l| (l.from, l.to)).collect();
    let max_legs = max_legs.unwrap_or(s.nodes.len().saturating_sub(1)).max(1);
    RouteTable::from_topology(s.nodes.len(), &lines, max_legs)
}

/// Transmission bookkeeping for a single interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    /// Signed GW per line, positive from→to.
    pub line_flow: Vec<f64>,
    /// GW received per node, ≥ 0.
    pub imports: Vec<f64>,
    /// GW sent per node, ≤ 0.
    pub exports: Vec<f64>,
    /// Power still wanted per node.
    pub fill: Vec<f64>,
    /// Power still offered per node.
    pub surplus: Vec<f64>,
    pub temp_line: Vec<f64>,
    pub temp_surplus: Vec<f64>,
    scratch: Vec<f64>,
}

impl FlowState {
    pub fn new(n_nodes: usize, n_lines: usize) -> Self {
        FlowState {
            line_flow: vec![0.0; n_lines],
            imports: vec![0.0; n_nodes],
            exports: vec![0.0; n_nodes],
            fill: vec![0.0; n_nodes],
            surplus: vec![0.0; n_nodes],
            temp_line: vec![0.0; n_lines],
            temp_surplus: vec![0.0; n_nodes],
            scratch: Vec::new(),
        }
    }

    /// Clears flows, imports and exports along with fill and surplus.
    pub fn reset(&mut self) {
        for v in [
            &mut self.line_flow,
            &mut self.imports,
            &mut self.exports,
            &mut self.fill,
            &mut self.surplus,
        ] {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

/// Largest extra flow the route can carry given committed and temporary
/// flows, limited by what its surplus node still offers.
pub fn max_route_flow(route: &Route, fs: &FlowState, line_caps: &[f64]) -> f64 {
    let mut mf = fs.surplus[route.surplus] - fs.temp_surplus[route.surplus];
    for leg in &route.legs {
        let committed = leg.dir * (fs.line_flow[leg.line] + fs.temp_line[leg.line]);
        mf = mf.min(line_caps[leg.line] - committed);
    }
    mf.max(0.0)
}

/// Moves surplus power to fill nodes, shortest routes first.
///
/// Fill nodes are served in ascending index order within each leg count.
/// When a fill node could import more than it needs, every route's draw is
/// scaled down by the same factor.
pub fn transmit(fs: &mut FlowState, rt: &RouteTable, line_caps: &[f64]) {
    let total_fill: f64 = fs.fill.iter().sum();
    let total_surplus: f64 = fs.surplus.iter().sum();
    if total_fill <= TOL || total_surplus <= TOL {
        return;
    }
    let mut mf = std::mem::take(&mut fs.scratch);
    for p in 1..=rt.max_legs {
        for fill in 0..rt.n_nodes {
            if fs.fill[fill] <= TOL {
                continue;
            }
            let routes = rt.group(fill, p);
            if routes.iter().all(|r| fs.surplus[r.surplus] <= TOL) {
                continue;
            }
            fs.temp_line.iter_mut().for_each(|x| *x = 0.0);
            fs.temp_surplus.iter_mut().for_each(|x| *x = 0.0);
            mf.clear();
            let mut imports_max = 0.0;
            for route in routes {
                let f = max_route_flow(route, fs, line_caps);
                for leg in &route.legs {
                    fs.temp_line[leg.line] += leg.dir * f;
                }
                fs.temp_surplus[route.surplus] += f;
                imports_max += f;
                mf.push(f);
            }
            if imports_max <= TOL {
                continue;
            }
            let scale = (fs.fill[fill] / imports_max).min(1.0);
            let mut received = 0.0;
            for (route, &f) in routes.iter().zip(&mf) {
                let f = f * scale;
                if f == 0.0 {
                    continue;
                }
                for leg in &route.legs {
                    fs.line_flow[leg.line] += leg.dir * f;
                }
                fs.exports[route.surplus] -= f;
                fs.surplus[route.surplus] = (fs.surplus[route.surplus] - f).max(0.0);
                received += f;
            }
            fs.imports[fill] += received;
            fs.fill[fill] = if scale < 1.0 {
                0.0
            } else {
                (fs.fill[fill] - received).max(0.0)
            };
        }
    }
    fs.temp_line.iter_mut().for_each(|x| *x = 0.0);
    fs.temp_surplus.iter_mut().for_each(|x| *x = 0.0);
    fs.scratch = mf;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fs_with(
        n: usize,
        lines: usize,
        fill: &[(usize, f64)],
        surplus: &[(usize, f64)],
    ) -> FlowState {
        let mut fs = FlowState::new(n, lines);
        for &(i, v) in fill {
            fs.fill[i] = v;
        }
        for &(i, v) in surplus {
            fs.surplus[i] = v;
        }
        fs
    }

    #[test]
    fn two_nodes_one_line() {
        let rt = RouteTable::from_topology(2, &[(0, 1)], 2);
        assert_eq!(rt.routes().count(), 2);
        assert!(rt.routes().all(|r| r.len() == 1));
    }

    #[test]
    fn triangle_groups() {
        let rt = RouteTable::from_topology(3, &[(0, 1), (1, 2), (2, 0)], 2);
        for fill in 0..3 {
            assert_eq!(rt.group(fill, 1).len(), 2);
            assert_eq!(rt.group(fill, 2).len(), 2);
        }
        for r in rt.routes() {
            let first = r.legs[0].line;
            let last = r.legs[r.len() - 1].line;
            let lines = [(0, 1), (1, 2), (2, 0)];
            let touches = |l: usize, n: usize| lines[l].0 == n || lines[l].1 == n;
            assert!(touches(first, r.fill));
            assert!(touches(last, r.surplus));
        }
    }

    #[test]
    fn disconnected_pair_has_no_routes() {
        let rt = RouteTable::from_topology(2, &[], 1);
        assert_eq!(rt.routes().count(), 0);
    }

    #[test]
    fn route_min_over_caps() {
        // Four nodes in a chain: fill 0, surplus 3.
        let rt = RouteTable::from_topology(4, &[(0, 1), (1, 2), (2, 3)], 3);
        let route = &rt.group(0, 3)[0];
        let mut fs = FlowState::new(4, 3);
        fs.surplus[3] = 100.0;
        assert_eq!(max_route_flow(route, &fs, &[10.0, 4.0, 7.0]), 4.0);
        fs.surplus[3] = 0.0;
        assert_eq!(max_route_flow(route, &fs, &[10.0, 4.0, 7.0]), 0.0);
    }

    #[test]
    fn saturated_line_carries_nothing() {
        let rt = RouteTable::from_topology(2, &[(0, 1)], 1);
        let route = &rt.group(0, 1)[0];
        let mut fs = FlowState::new(2, 1);
        fs.surplus[1] = 9.0;
        // Flow into node 0 from node 1 runs against the from→to direction.
        fs.line_flow[0] = -5.0;
        assert_eq!(max_route_flow(route, &fs, &[5.0]), 0.0);
    }

    #[test]
    fn partial_fill_from_single_surplus() {
        let rt = RouteTable::from_topology(2, &[(0, 1)], 1);
        let mut fs = fs_with(2, 1, &[(0, 5.0)], &[(1, 3.0)]);
        transmit(&mut fs, &rt, &[10.0]);
        assert_eq!(fs.imports[0], 3.0);
        assert_eq!(fs.exports[1], -3.0);
        assert_eq!(fs.line_flow[0].abs(), 3.0);
        assert_eq!(fs.fill[0], 2.0);
        assert_eq!(fs.surplus[1], 0.0);
    }

    #[test]
    fn no_surplus_is_a_no_op() {
        let rt = RouteTable::from_topology(2, &[(0, 1)], 1);
        let mut fs = fs_with(2, 1, &[(0, 5.0)], &[]);
        let before = fs.clone();
        transmit(&mut fs, &rt, &[10.0]);
        assert_eq!(fs, before);
    }

    #[test]
    fn imports_rescaled_to_fill() {
        let rt = RouteTable::from_topology(3, &[(0, 1), (0, 2)], 2);
        let mut fs = fs_with(3, 2, &[(0, 2.0)], &[(1, 4.0), (2, 4.0)]);
        transmit(&mut fs, &rt, &[10.0, 10.0]);
        assert!((fs.imports[0] - 2.0).abs() < 1e-12);
        assert!((fs.exports[1] + 1.0).abs() < 1e-12);
        assert!((fs.exports[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shortest_legs_preferred() {
        // Line graph 0-1-2: fill at 0 fully covered by node 1.
        let rt = RouteTable::from_topology(3, &[(0, 1), (1, 2)], 2);
        let mut fs = fs_with(3, 2, &[(0, 2.0)], &[(1, 5.0), (2, 5.0)]);
        transmit(&mut fs, &rt, &[10.0, 10.0]);
        assert_eq!(fs.exports[2], 0.0);
        assert_eq!(fs.line_flow[1], 0.0);
        assert!((fs.imports[0] - 2.0).abs() < 1e-12);
    }

    fn random_topology() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (2usize..6).prop_flat_map(|n| {
            let edge = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
            (Just(n), prop::collection::vec(edge, 0..8))
        })
    }

    proptest! {
        #[test]
        fn conservation_and_caps(
            (n, lines) in random_topology(),
            fill in prop::collection::vec(0.0f64..5.0, 6),
            surplus in prop::collection::vec(0.0f64..5.0, 6),
            caps in prop::collection::vec(0.0f64..4.0, 8),
        ) {
            let rt = RouteTable::from_topology(n, &lines, n - 1);
            let caps = &caps[..lines.len()];
            let mut fs = FlowState::new(n, lines.len());
            // A node either wants or offers power, never both.
            for i in 0..n {
                if i % 2 == 0 { fs.fill[i] = fill[i]; } else { fs.surplus[i] = surplus[i]; }
            }
            let fill0 = fs.fill.clone();
            let surplus0 = fs.surplus.clone();
            transmit(&mut fs, &rt, caps);
            let imp: f64 = fs.imports.iter().sum();
            let exp: f64 = fs.exports.iter().sum();
            prop_assert!((imp + exp).abs() <= 1e-9);
            for (f, c) in fs.line_flow.iter().zip(caps) {
                prop_assert!(f.abs() <= c + 1e-9);
            }
            for i in 0..n {
                prop_assert!(fs.fill[i] >= -1e-9 && fs.surplus[i] >= -1e-9);
                prop_assert!(fs.imports[i] <= fill0[i] + 1e-9);
                prop_assert!(-fs.exports[i] <= surplus0[i] + 1e-9);
            }
            // Net flow at each node matches its imports and exports.
            for i in 0..n {
                let mut net_in = 0.0;
                for (l, &(a, b)) in lines.iter().enumerate() {
                    if b == i { net_in += fs.line_flow[l]; }
                    if a == i { net_in -= fs.line_flow[l]; }
                }
                prop_assert!((net_in - (fs.imports[i] + fs.exports[i])).abs() <= 1e-9);
            }
            let after = fs.clone();
            transmit(&mut fs, &rt, caps);
            let exhausted = fs.fill.iter().sum::<f64>() <= 1e-12 || fs.surplus.iter().sum::<f64>() <= 1e-12;
            if exhausted {
                prop_assert_eq!(fs, after);
            }
        }
    }
}
