/// Derivative-free Nelder–Mead simplex minimiser with a hard evaluation
/// budget.
///
/// The evaluation sequence does not depend on `max_evals`, so raising the
/// budget only extends a run; it never changes its prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Offset of the initial simplex vertices along each axis.
    pub initial_step: f64,
    /// Stop once both the vertex spread and the value spread fall below it.
    pub tolerance: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Budget<F> {
    f: F,
    remaining: usize,
    evals: usize,
    best: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Budget<F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        self.evals += 1;
        let fx = (self.f)(x);
        if self.best.as_ref().is_none_or(|(_, b)| fx < *b) {
            self.best = Some((x.to_vec(), fx));
        }
        Some(fx)
    }
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            tolerance: 1e-4,
            max_evals: 400,
        }
    }
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, x0: &[f64], f: F) -> NelderMeadResult {
        assert!(!x0.is_empty(), "cannot minimise over zero dimensions");
        let mut budget = Budget {
            f,
            remaining: self.max_evals.max(1),
            evals: 0,
            best: None,
        };
        let converged = self.run(x0, &mut budget).is_some_and(|c| c);
        let (x, fx) = budget.best.expect("at least one evaluation");
        NelderMeadResult {
            x,
            fx,
            evals: budget.evals,
            converged,
        }
    }

    /// Returns `Some(true)` on convergence, `None` when the budget ran out.
    fn run<F: FnMut(&[f64]) -> f64>(&self, x0: &[f64], budget: &mut Budget<F>) -> Option<bool> {
        let n = x0.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), budget.eval(x0)?));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let fx = budget.eval(&x)?;
            simplex.push((x, fx));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if self.has_converged(&simplex) {
                return Some(true);
            }
            let (best, second_worst, worst) = (simplex[0].1, simplex[n - 1].1, simplex[n].1);

            let centroid: Vec<f64> = (0..n)
                .map(|d| simplex[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
                .collect();
            let toward = |from: &[f64], coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(from)
                    .map(|(c, x)| c + coef * (x - c))
                    .collect()
            };

            let reflected = toward(&simplex[n].0, -REFLECT);
            let f_reflected = budget.eval(&reflected)?;

            if f_reflected < best {
                let expanded = toward(&reflected, EXPAND);
                let f_expanded = budget.eval(&expanded)?;
                simplex[n] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
                continue;
            }
            if f_reflected < second_worst {
                simplex[n] = (reflected, f_reflected);
                continue;
            }

            let (contracted, limit) = if f_reflected < worst {
                (toward(&reflected, CONTRACT), f_reflected)
            } else {
                (toward(&simplex[n].0, CONTRACT), worst)
            };
            let f_contracted = budget.eval(&contracted)?;
            if f_contracted < limit {
                simplex[n] = (contracted, f_contracted);
                continue;
            }

            let anchor = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = anchor
                    .iter()
                    .zip(&vertex.0)
                    .map(|(a, v)| a + SHRINK * (v - a))
                    .collect();
                let fx = budget.eval(&x)?;
                *vertex = (x, fx);
            }
        }
    }

    fn has_converged(&self, sorted: &[(Vec<f64>, f64)]) -> bool {
        let (x0, f0) = &sorted[0];
        let f_spread = sorted.iter().map(|(_, f)| (f - f0).abs()).fold(0.0, f64::max);
        let x_spread = sorted
            .iter()
            .flat_map(|(x, _)| x.iter().zip(x0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        f_spread <= self.tolerance && x_spread <= self.tolerance
    }
}
