//! Kantorovich-Rubinstein distance by exact min-cost flow on the transport
//! polytope (successive shortest paths with Johnson potentials).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::dist::Dist;

/// Minimum of Σ c(i,j)·x(i,j) over x ≥ 0 with row sums `supply` and column
/// sums `demand` (equal totals). Costs must be non-negative.
pub fn transport_cost(supply: &[u64], demand: &[u64], cost: impl Fn(usize, usize) -> u64) -> u128 {
    let (n, m) = (supply.len(), demand.len());
    assert_eq!(supply.iter().sum::<u64>(), demand.iter().sum::<u64>(), "unbalanced transport problem");
    let c: Vec<i64> = (0..n * m).map(|k| cost(k / m, k % m) as i64).collect();
    let mut flow = vec![0u64; n * m];
    let mut left = supply.to_vec();
    let mut need = demand.to_vec();
    // Node v < n is source i = v, node n + j is sink j.
    let mut pot = vec![0i64; n + m];
    let mut total = 0u128;
    let inf = i64::MAX / 4;
    loop {
        if need.iter().all(|&d| d == 0) {
            break;
        }
        let mut dist = vec![inf; n + m];
        let mut prev = vec![usize::MAX; n + m];
        let mut done = vec![false; n + m];
        for i in 0..n {
            if left[i] > 0 {
                dist[i] = 0;
            }
        }
        loop {
            let mut u = usize::MAX;
            let mut best = inf;
            for v in 0..n + m {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < n {
                for j in 0..m {
                    let v = n + j;
                    let nd = dist[u] + c[u * m + j] + pot[u] - pot[v];
                    if nd < dist[v] {
                        dist[v] = nd;
                        prev[v] = u;
                    }
                }
            } else {
                let j = u - n;
                for i in 0..n {
                    if flow[i * m + j] > 0 {
                        let nd = dist[u] - c[i * m + j] + pot[u] - pot[i];
                        if nd < dist[i] {
                            dist[i] = nd;
                            prev[i] = u;
                        }
                    }
                }
            }
        }
        let target = (0..m)
            .filter(|&j| need[j] > 0 && dist[n + j] < inf)
            .min_by_key(|&j| dist[n + j])
            .expect("a sink with demand is reachable");
        let reach = dist[n + target];
        for v in 0..n + m {
            pot[v] += dist[v].min(reach);
        }
        // Walk back to find the bottleneck, then push.
        let mut amount = need[target];
        let mut v = n + target;
        loop {
            let u = prev[v];
            if v >= n {
                if u == usize::MAX {
                    unreachable!("sink without predecessor")
                }
            } else if u == usize::MAX {
                amount = amount.min(left[v]);
                break;
            } else {
                amount = amount.min(flow[v * m + (u - n)]);
            }
            v = u;
        }
        let mut v = n + target;
        loop {
            let u = prev[v];
            if v >= n {
                flow[u * m + (v - n)] += amount;
                total += amount as u128 * c[u * m + (v - n)] as u128;
            } else if u == usize::MAX {
                left[v] -= amount;
                break;
            } else {
                flow[v * m + (u - n)] -= amount;
                total -= amount as u128 * c[v * m + (u - n)] as u128;
            }
            v = u;
        }
        need[target] -= amount;
    }
    total
}

/// KR distance between `a` and `b` for a ground metric with rational values.
pub fn kr_distance(a: &Dist, b: &Dist, metric: impl Fn(u64, u64) -> BigRational) -> BigRational {
    let sa: Vec<u64> = a.support().collect();
    let sb: Vec<u64> = b.support().collect();
    let costs: Vec<BigRational> = sa.iter().flat_map(|&x| sb.iter().map(move |&y| (x, y))).map(|(x, y)| metric(x, y)).collect();
    assert!(costs.iter().all(|c| c >= &BigRational::zero()), "ground metric must be non-negative");
    let scale = costs.iter().fold(BigInt::from(1), |acc, c| acc.lcm(c.denom()));
    let int_costs: Vec<u64> = costs
        .iter()
        .map(|c| (c.numer() * (&scale / c.denom())).to_u64().expect("cost fits u64"))
        .collect();
    let (ta, tb) = (a.total(), b.total());
    let supply: Vec<u64> = a.atoms().iter().map(|&(_, w)| w * tb).collect();
    let demand: Vec<u64> = b.atoms().iter().map(|&(_, w)| w * ta).collect();
    let m = sb.len();
    let cost = transport_cost(&supply, &demand, |i, j| int_costs[i * m + j]);
    BigRational::new(BigInt::from(cost), scale * BigInt::from(ta as u128 * tb as u128))
}
