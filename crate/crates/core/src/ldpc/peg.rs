//! Progressive edge growth.
//!
//! Edges are added one variable node at a time. Each new edge goes to a check
//! node that is as far as possible from the variable in the current graph
//! (outside its BFS tree when the tree stops growing, else in the last layer
//! before the tree covers every check), picking the lowest-degree candidate.
//! Ties are broken with a seeded RNG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ParityCheckMatrix;

pub(super) fn progressive_edge_growth(n: usize, m: usize, column_weight: usize, seed: u64) -> ParityCheckMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<u32>> = vec![Vec::with_capacity(column_weight); n];
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); m];
    let mut check_seen = vec![0u32; m];
    let mut var_seen = vec![0u32; n];
    let mut stamp = 0u32;
    let mut candidates = Vec::with_capacity(m);
    let mut frontier = Vec::new();
    let mut next = Vec::new();

    for v in 0..n {
        for edge in 0..column_weight {
            let chosen = if edge == 0 {
                candidates.clear();
                candidates.extend(0..m as u32);
                pick_lowest_degree(&candidates, &rows, &mut rng)
            } else {
                stamp += 1;
                frontier.clear();
                var_seen[v] = stamp;
                let mut reached = 0usize;
                for &c in &cols[v] {
                    check_seen[c as usize] = stamp;
                    frontier.push(c);
                    reached += 1;
                }
                loop {
                    next.clear();
                    for &c in &frontier {
                        for &u in &rows[c as usize] {
                            if var_seen[u as usize] == stamp {
                                continue;
                            }
                            var_seen[u as usize] = stamp;
                            for &c2 in &cols[u as usize] {
                                if check_seen[c2 as usize] != stamp {
                                    check_seen[c2 as usize] = stamp;
                                    next.push(c2);
                                }
                            }
                        }
                    }
                    if next.is_empty() || reached + next.len() == m {
                        // Candidates: checks outside the tree before this layer.
                        candidates.clear();
                        if next.is_empty() {
                            candidates.extend((0..m as u32).filter(|&c| check_seen[c as usize] != stamp));
                        } else {
                            candidates.extend_from_slice(&next);
                        }
                        break;
                    }
                    reached += next.len();
                    std::mem::swap(&mut frontier, &mut next);
                }
                if candidates.is_empty() {
                    // Every check is already adjacent to v; only possible for tiny m.
                    candidates.extend((0..m as u32).filter(|c| !cols[v].contains(c)));
                }
                pick_lowest_degree(&candidates, &rows, &mut rng)
            };
            cols[v].push(chosen);
            rows[chosen as usize].push(v as u32);
        }
    }
    ParityCheckMatrix::from_columns(m, cols).expect("PEG produces a valid matrix")
}

fn pick_lowest_degree(candidates: &[u32], rows: &[Vec<u32>], rng: &mut ChaCha8Rng) -> u32 {
    let min = candidates.iter().map(|&c| rows[c as usize].len()).min().expect("non-empty candidate set");
    let ties: Vec<u32> = candidates.iter().copied().filter(|&c| rows[c as usize].len() == min).collect();
    ties[rng.random_range(0..ties.len())]
}
