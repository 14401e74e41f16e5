#![allow(dead_code)]

use centrank::graph::Graph;
use centrank::seed;
use rand::Rng;

/// Random connected graph: a random recursive tree plus each remaining
/// pair with probability `p`.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = seed::rng(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v) as u32, v as u32));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u as u32, v as u32));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap().0
}

/// All-pairs hop distances by Floyd-Warshall; `u32::MAX` when unreachable.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.n();
    let inf = u32::MAX / 2;
    let mut d = vec![vec![inf; n]; n];
    for u in 0..n {
        d[u][u] = 0;
        for &v in g.neighbors(u) {
            d[u][v as usize] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    for row in &mut d {
        for x in row.iter_mut() {
            if *x >= inf {
                *x = u32::MAX;
            }
        }
    }
    d
}

/// Betweenness by listing every geodesic of every unordered pair.
pub fn geodesic_betweenness(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let d = floyd_warshall(g);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let cur = *path.last().unwrap();
                if cur == t {
                    paths.push(path);
                    continue;
                }
                for &x in g.neighbors(cur) {
                    let x = x as usize;
                    if d[s][x] == d[s][cur] + 1 && d[x][t] + 1 == d[cur][t] {
                        let mut next = path.clone();
                        next.push(x);
                        stack.push(next);
                    }
                }
            }
            let total = paths.len() as f64;
            let mut through = vec![0usize; n];
            for p in &paths {
                for &w in &p[1..p.len() - 1] {
                    through[w] += 1;
                }
            }
            for w in 0..n {
                bc[w] += through[w] as f64 / total;
            }
        }
    }
    bc
}

/// Kendall τ-b from pairwise counts, O(n²).
pub fn brute_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut c_minus_d, mut untied_x, mut untied_y) = (0i64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).unwrap() as i64;
            let dy = y[i].partial_cmp(&y[j]).unwrap() as i64;
            c_minus_d += dx * dy;
            untied_x += (dx != 0) as u64;
            untied_y += (dy != 0) as u64;
        }
    }
    if untied_x == 0 || untied_y == 0 {
        return None;
    }
    Some(c_minus_d as f64 / ((untied_x as f64) * (untied_y as f64)).sqrt())
}
