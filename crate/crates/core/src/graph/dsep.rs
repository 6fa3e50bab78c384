//! Reachability ("Bayes ball") d-separation on DAGs.

use super::Dag;

#[derive(Clone, Copy)]
enum Dir {
    /// Arrived from a child, travelling against edge direction.
    Up,
    /// Arrived from a parent.
    Down,
}

/// Nodes reachable from `sources` along trails that are active given `given`.
pub(crate) fn reachable(g: &Dag, sources: &[usize], given: &[usize]) -> Vec<bool> {
    let n = g.len();
    let mut observed = vec![false; n];
    for &z in given {
        observed[z] = true;
    }
    // A collider is open iff it or one of its descendants is observed.
    let opens_collider = g.ancestor_mask(given);

    let mut visited = vec![[false; 2]; n];
    let mut reached = vec![false; n];
    let mut stack: Vec<(usize, Dir)> = sources.iter().map(|&s| (s, Dir::Up)).collect();
    while let Some((v, dir)) = stack.pop() {
        let slot = match dir {
            Dir::Up => 0,
            Dir::Down => 1,
        };
        if visited[v][slot] {
            continue;
        }
        visited[v][slot] = true;
        if !observed[v] {
            reached[v] = true;
        }
        match dir {
            Dir::Up if !observed[v] => {
                stack.extend(g.parent_indices(v).iter().map(|&p| (p, Dir::Up)));
                stack.extend(g.child_indices(v).iter().map(|&c| (c, Dir::Down)));
            }
            Dir::Up => {}
            Dir::Down => {
                if !observed[v] {
                    stack.extend(g.child_indices(v).iter().map(|&c| (c, Dir::Down)));
                }
                if opens_collider[v] {
                    stack.extend(g.parent_indices(v).iter().map(|&p| (p, Dir::Up)));
                }
            }
        }
    }
    reached
}

pub(crate) fn separated(g: &Dag, x: &[usize], y: &[usize], z: &[usize]) -> bool {
    if x.is_empty() || y.is_empty() {
        return true;
    }
    let reached = reachable(g, x, z);
    y.iter().all(|&v| !reached[v])
}
