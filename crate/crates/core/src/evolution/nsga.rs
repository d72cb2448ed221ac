use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{Fitness, Individual};
use crate::error::{Error, Result};

/// Pareto dominance on (cost ↓, fidelity ↑): no worse in both and strictly
/// better in at least one.
pub fn dominates(a: &Fitness, b: &Fitness) -> bool {
    a.fidelity >= b.fidelity && a.cost <= b.cost && (a.fidelity > b.fidelity || a.cost < b.cost)
}

fn fitnesses(pop: &[Individual]) -> Result<Vec<Fitness>> {
    pop.iter()
        .enumerate()
        .map(|(i, ind)| ind.fitness.ok_or(Error::MissingFitness(i)))
        .collect()
}

/// Fast non-dominated sorting. Sets `rank` (1-based) and `crowding` on every
/// individual and returns the fronts as index lists, best first.
pub fn nondominated_sort(pop: &mut [Individual]) -> Result<Vec<Vec<usize>>> {
    let fit = fitnesses(pop)?;
    let n = fit.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&fit[i], &fit[j]) {
                dominated[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(&fit[j], &fit[i]) {
                dominated[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    for (r, front) in fronts.iter().enumerate() {
        let crowding = crowding_distance(front.iter().map(|&i| fit[i]).collect::<Vec<_>>().as_slice());
        for (&i, d) in front.iter().zip(crowding) {
            pop[i].rank = Some(r + 1);
            pop[i].crowding = d;
        }
    }
    Ok(fronts)
}

/// Crowding distance of each point within one front. Boundary points get
/// infinity; each objective is normalized by its range.
pub fn crowding_distance(front: &[Fitness]) -> Vec<f64> {
    let n = front.len();
    let mut d = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let objectives: [fn(&Fitness) -> f64; 2] = [|f| f.cost as f64, |f| f.fidelity];
    for obj in objectives {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| obj(&front[a]).total_cmp(&obj(&front[b])));
        let (lo, hi) = (obj(&front[order[0]]), obj(&front[order[n - 1]]));
        d[order[0]] = f64::INFINITY;
        d[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for k in 1..n - 1 {
                d[order[k]] += (obj(&front[order[k + 1]]) - obj(&front[order[k - 1]])) / (hi - lo);
            }
        }
    }
    d
}

/// Samples ranks with weight e^{−r}, then a uniform member of the rank.
#[derive(Clone, Debug)]
pub struct RankSelector {
    members: Vec<Vec<usize>>,
    weights: WeightedIndex<f64>,
}

impl RankSelector {
    /// Built from a ranked population.
    pub fn new(pop: &[Individual]) -> Result<Self> {
        if pop.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (i, ind) in pop.iter().enumerate() {
            let r = ind.rank.ok_or(Error::MissingFitness(i))?;
            if members.len() < r {
                members.resize(r, Vec::new());
            }
            members[r - 1].push(i);
        }
        let (members, weights): (Vec<_>, Vec<_>) = members
            .into_iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .map(|(r, m)| (m, (-(r as f64 + 1.0)).exp()))
            .unzip();
        let weights = WeightedIndex::new(weights).expect("positive weights");
        Ok(Self { members, weights })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let m = &self.members[self.weights.sample(rng)];
        m[rng.random_range(0..m.len())]
    }
}

/// One parent drawn from a ranked population.
pub fn select_parent<'a, R: Rng + ?Sized>(pop: &'a [Individual], rng: &mut R) -> Result<&'a Individual> {
    let i = RankSelector::new(pop)?.sample(rng);
    Ok(&pop[i])
}

/// Indices of max(1, ⌊fraction·N⌋) elites, taken rank by rank with random
/// choice inside the rank that does not fit entirely. The individual with
/// the highest fidelity (lowest cost among ties) is always included.
pub fn select_elites<R: Rng + ?Sized>(pop: &[Individual], fraction: f64, rng: &mut R) -> Result<Vec<usize>> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let fit = fitnesses(pop)?;
    let count = ((fraction * pop.len() as f64).floor() as usize).clamp(1, pop.len());
    let best = (0..pop.len())
        .min_by(|&a, &b| fit[b].fidelity.total_cmp(&fit[a].fidelity).then(fit[a].cost.cmp(&fit[b].cost)))
        .expect("non-empty");
    let mut by_rank: Vec<Vec<usize>> = Vec::new();
    for (i, ind) in pop.iter().enumerate() {
        let r = ind.rank.ok_or(Error::MissingFitness(i))?;
        if by_rank.len() < r {
            by_rank.resize(r, Vec::new());
        }
        if i != best {
            by_rank[r - 1].push(i);
        }
    }
    let mut elites = vec![best];
    for mut members in by_rank {
        let room = count - elites.len();
        if room == 0 {
            break;
        }
        if members.len() > room {
            let (chosen, _) = members.partial_shuffle(rng, room);
            elites.extend_from_slice(chosen);
        } else {
            elites.append(&mut members);
        }
    }
    Ok(elites)
}
