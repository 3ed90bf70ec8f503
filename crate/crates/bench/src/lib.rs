//! Benchmark inputs shared by the bench targets.

use polyot::fixtures::{dumbbell, l_shape, square, square_of_area, unit_square};
use polyot::otsolve::{solve, NewtonOptions, SemiDiscreteProblem, SemiDiscreteSolution};
use polyot::partial::PartialProblem;
use polyot::Point2;

pub fn l_shape_problem(n: usize) -> SemiDiscreteProblem {
    SemiDiscreteProblem::sampled(unit_square(), l_shape(), n, 1, 5).expect("fixture")
}

pub fn dumbbell_solution(n: usize) -> SemiDiscreteSolution {
    let t = dumbbell();
    let p = SemiDiscreteProblem::sampled(square_of_area(t.area()), t, n, 1, 5).expect("fixture");
    solve(&p, &NewtonOptions::default()).expect("solvable")
}

pub fn separated_squares(mass: f64) -> PartialProblem {
    PartialProblem::new(square(-2.0, 0.0, 1.0), square(1.0, 0.0, 1.0), mass).expect("fixture")
}

/// Deterministic pseudo-random points in the unit square (Weyl sequence).
pub fn points(n: usize, shift: f64) -> Vec<Point2> {
    let (a, b) = (0.754_877_666_246_692_7, 0.569_840_290_998_053_2);
    (1..=n)
        .map(|k| Point2::new((shift + a * k as f64).fract(), (shift + b * k as f64).fract()))
        .collect()
}
