//! Small hand-checked markets used throughout the tests and docs.

use crate::model::{Allocation, Instance};

/// Five agents, six houses; agents 1-4 own `h1..h4`, agent 5 owns nothing.
pub fn e1() -> Instance {
    Instance::from_indices(
        6,
        vec![Some(0), Some(1), Some(2), Some(3), None],
        vec![vec![1], vec![2], vec![0], vec![4], vec![4, 5]],
    )
    .expect("fixture is valid")
}

/// `1->h2, 2->h3, 3->h1, 4->h4, 5->h5`: S-IR with welfare 4.
pub fn e1_x() -> Allocation {
    Allocation::from_indices(&e1(), &[Some(1), Some(2), Some(0), Some(3), Some(4)]).expect("valid")
}

/// `1->h2, 2->h3, 3->h1, 4->h5, 5->h6`: everyone satisfied.
pub fn e1_y() -> Allocation {
    Allocation::from_indices(&e1(), &[Some(1), Some(2), Some(0), Some(4), Some(5)]).expect("valid")
}

/// Two owners of unacceptable houses; agent 1 wants agent 2's house.
pub fn e2() -> Instance {
    Instance::from_indices(2, vec![Some(0), Some(1)], vec![vec![1], vec![]]).expect("fixture is valid")
}

/// Four owners of unacceptable houses: `h1` suits agents 2 and 3, `h2` suits
/// agents 1 and 4.
pub fn e3() -> Instance {
    Instance::from_indices(
        4,
        vec![Some(0), Some(1), Some(2), Some(3)],
        vec![vec![1], vec![0], vec![0], vec![1]],
    )
    .expect("fixture is valid")
}

/// `1->h3, 2->h4, 3->h1, 4->h2`: IR and welfare-maximal, blocked by `{1, 2}`.
pub fn e3_z() -> Allocation {
    Allocation::from_indices(&e3(), &[Some(2), Some(3), Some(0), Some(1)]).expect("valid")
}
