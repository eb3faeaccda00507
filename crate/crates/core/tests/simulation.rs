//! Monte Carlo cross-check of certified bad-state reachability bounds.

use ppscert::ovi::OviParams;
use ppscert::ppda::{bad_state_transform, basic_certificate, Ppda};
use ppscert::random::{random_ppda, PpdaShape};
use ppscert::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RUNS: usize = 50_000;
const MAX_STEPS: usize = 1_000;

/// Rule choices per head with float probabilities, indexed `q * |stack| + z`.
type Heads = Vec<Vec<(f64, usize, Vec<usize>)>>;

fn heads(a: &Ppda) -> Heads {
    let ng = a.stack().len();
    let mut out = vec![Vec::new(); a.states().len() * ng];
    for r in a.rules() {
        out[r.state * ng + r.symbol].push((r.prob.to_f64(), r.target, r.push.clone()));
    }
    out
}

/// True if a run from the initial configuration visits `bad`. Runs that get
/// stuck, empty the stack elsewhere or exceed the step cap count as misses.
fn hits<R: Rng>(a: &Ppda, heads: &Heads, bad: usize, rng: &mut R) -> bool {
    let ng = a.stack().len();
    let (mut q, z) = a.init();
    let mut stack = vec![z];
    for _ in 0..MAX_STEPS {
        if q == bad {
            return true;
        }
        let Some(&top) = stack.last() else { return false };
        let mut draw: f64 = rng.gen();
        let mut chosen = None;
        for (p, target, push) in &heads[q * ng + top] {
            if draw < *p {
                chosen = Some((*target, push));
                break;
            }
            draw -= p;
        }
        let Some((target, push)) = chosen else { return false };
        stack.pop();
        stack.extend(push.iter().rev());
        q = target;
    }
    false
}

#[test]
fn reachability_bounds_dominate_simulation() {
    let mut checked = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut shape = PpdaShape::new(3, 2);
        shape.leak_prob = 0.3;
        let a = random_ppda(&mut rng, &shape);
        let bad = 2;
        let t = bad_state_transform(&a, &a.states()[bad]).unwrap();
        let Ok((solved, idx)) = basic_certificate(&t, &OviParams::default()) else {
            continue;
        };
        let (q0, z0) = t.init();
        let bound = solved.certificate.upper[idx.var(q0, z0, bad)].to_f64();
        let table = heads(&a);
        let count = (0..RUNS).filter(|_| hits(&a, &table, bad, &mut rng)).count();
        let p = count as f64 / RUNS as f64;
        let se = (p * (1.0 - p) / RUNS as f64).sqrt();
        assert!(p <= bound + 3.0 * se + 1e-12, "seed {seed}: simulated {p}, bound {bound}");
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} automata certified");
}
