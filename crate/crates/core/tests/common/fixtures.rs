//! Small hand-written datasets with frozen reference values.

use super::Rows;

pub fn six_by_three() -> Rows {
    Rows {
        x: vec![
            vec![1., 4., 2.],
            vec![3., 1., 5.],
            vec![2., 2., 2.5],
            vec![5., 3., 1.],
            vec![4., 6., 3.],
            vec![7., 2., 6.],
        ],
        y: vec![2., 3., 1., 6., 4., 9.],
    }
}

pub fn eight_by_four() -> Rows {
    Rows {
        x: vec![
            vec![1., 0., 3., 2.],
            vec![2., 1., 1., 5.],
            vec![4., 3., 2., 1.],
            vec![3., 2., 5., 4.],
            vec![6., 5., 4., 3.],
            vec![5., 7., 6., 8.],
            vec![8., 4., 9., 6.],
            vec![7., 9., 7., 7.],
        ],
        y: vec![1., 3., 2., 5., 4., 8., 6., 12.],
    }
}

pub fn ten_by_three() -> Rows {
    Rows {
        x: (0..10)
            .map(|i| {
                let i = i as f64;
                vec![i, (i * i) % 7.0, (3.0 * i + 1.0) % 5.0]
            })
            .collect(),
        y: vec![1., 2., 2., 4., 3., 7., 5., 6., 9., 15.],
    }
}

pub const TEN_BY_THREE_SUBSETS: [[usize; 5]; 2] = [[0, 1, 2, 4, 6], [1, 3, 5, 7, 8]];

/// Leave-one-out influence of the last row of [`six_by_three`] at 0.25, 0.5, 0.75.
pub const SIX_LOO_LAST: [f64; 3] = [
    1.705_808_490_544_739_3e-1,
    2.340_745_567_624_361_6e-1,
    1.561_470_324_389_640_2e-1,
];

/// Summed leave-one-out influence on [`eight_by_four`] for rows 0 and 7.
pub const EIGHT_ASYM_HIM: [(usize, f64); 2] =
    [(0, 9.205_674_922_411_245e-3), (7, 9.773_708_976_542_603e-3)];

/// Subset influence of row 9 of [`ten_by_three`], indexed `[level][subset]`.
pub const TEN_SUBSET: [[f64; 2]; 3] = [
    [1.306_639_050_337_892_2e-1, 1.457_908_918_235_512_3e-1],
    [1.715_745_064_360_225_7e-1, 2.150_169_503_086_061e-1],
    [1.123_076_567_151_761_6e-1, 1.492_875_044_248_844_5e-1],
];
pub const TEN_T_MIN: f64 = 4.043_075_641_746_341;
pub const TEN_T_MAX: f64 = 1.836_343_247_605_350_4e1;

/// Asymmetric correlation of `x = (1, 2, 3, 4, 10)` and `y = (2, 1, 4, 3, 9)` at 0.25.
pub const FIVE_POINT_CORRELATION: f64 = 9.587_732_347_297_903e-1;
