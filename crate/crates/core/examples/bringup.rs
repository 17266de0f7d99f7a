use xxz_qtm::model::ChainParams;
use xxz_qtm::qtm::*;
use xxz_qtm::spectrum::sector_block_complex;
use ndarray::Array2;
use ndarray_linalg::Eig;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

fn stag_sector(index: usize, sites: usize) -> usize {
    (1..=sites).map(|s| { let b = (index >> (sites - s)) & 1; if s % 2 == 1 { b } else { 1 - b } }).sum()
}

fn main() {
    let zeta = PI / 7.0;
    let p5 = ChainParams::new(0.5, zeta, 0.0, 100.0, 5, 10).unwrap();
    let xi0 = C64::new(0.0, -zeta / 100.0);
    let tq = transfer_matrix(xi0, &p5, DEFAULT_MEMORY_BUDGET).unwrap();
    for m in [5usize, 4] {
        let idx: Vec<usize> = (0..(1usize << 10)).filter(|&i| stag_sector(i, 10) == m).collect();
        let block = sector_block_complex(&tq, &idx);
        let (vals, _) = block.eig().unwrap();
        let mut v: Vec<C64> = vals.to_vec();
        v.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap().then(
            a.im.atan2(a.re).partial_cmp(&b.im.atan2(b.re)).unwrap()));
        println!("=== t_q(-i zeta/T) sector {m} ===");
        let show: Vec<usize> = if m == 5 { vec![0,1,2,3,11,12,13,81,82,83,84] } else { vec![0,8,9,10,15,16,17,121,122,123,124] };
        for k in show {
            println!("  [{k:3}] {:+.6e} {:+.6e} i   |.| {:.6e}", v[k].re, v[k].im, v[k].norm());
        }
    }
}
