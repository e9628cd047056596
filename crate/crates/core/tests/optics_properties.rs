use proptest::prelude::*;

use talbot_lattice::analysis::{self_image_fidelity, self_image_fidelity_in, Region};
use talbot_lattice::optics::{
    compute_carpet, io, propagate_with, talbot_length, FieldModel, GridSpec, LatticeBeamArray, OpticalConfig,
    PropagationOptions, Reimaging, TransferFunction,
};
use talbot_lattice::units::{NM, UM};

const A: f64 = 14.1 * UM;
const W0: f64 = 1.45 * UM;
const LAMBDA: f64 = 798.6 * NM;

#[test]
fn periodic_lattice_repeats_after_one_talbot_length() {
    // The window wraps after exactly 8 pitches. One extra ring of beamlets
    // supplies the tails across the seam, so the source is periodic too.
    let cells = 8;
    let grid = GridSpec::periodic(A, cells, 1024).unwrap();
    assert!(grid.dx <= W0 / 8.0);
    let source = LatticeBeamArray::square(cells + 2, A, W0, LAMBDA).field(grid, 0.0).unwrap();
    let zt = talbot_length(A, LAMBDA).unwrap();
    let opts = PropagationOptions::periodic(TransferFunction::Paraxial);
    let half = Region::new([-2.0 * A, 2.0 * A], [-2.0 * A, 2.0 * A]);
    for z in [0.0, zt / 8.0, zt / 3.0] {
        let a = propagate_with(&source, LAMBDA, z, opts).unwrap().intensity();
        let b = propagate_with(&source, LAMBDA, z + zt, opts).unwrap().intensity();
        let f = self_image_fidelity_in(&a, &b, &half, 0.5 * A).unwrap();
        assert!(f.value >= 0.99, "z = {z:e}: fidelity {}", f.value);
        assert!(f.shift[0].hypot(f.shift[1]) < 0.1 * A);
    }
}

#[test]
fn untilted_array_is_symmetric_about_the_focal_plane() {
    let arr = LatticeBeamArray::square(6, A, W0, LAMBDA);
    let grid = GridSpec::for_array(A, 6, W0, 8.0, 2.0).unwrap();
    for z in [3.0 * UM, 40.0 * UM, 200.0 * UM] {
        let p = arr.field(grid, z).unwrap().intensity();
        let m = arr.field(grid, -z).unwrap().intensity();
        let scale = p.max();
        let worst = p.values.iter().zip(&m.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-12 * scale, "z = {z:e}: {worst:e}");
    }
}

#[test]
fn carpet_slices_round_trip_through_rasters() {
    let mut cfg = OpticalConfig::dense_lattice();
    cfg.lenslet_count = 3;
    let grid = GridSpec::for_array(cfg.pitch_m, 3, W0, 8.0, 2.0).unwrap();
    let zt = cfg.talbot_length().unwrap();
    let carpet = compute_carpet(&cfg, &[0.0, zt / 2.0], FieldModel::Beamlets, grid).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let files = io::write_carpet(tmp.path(), &carpet).unwrap();
    assert_eq!(files.len(), 5);
    let index = io::read_carpet_index(tmp.path()).unwrap();
    assert_eq!(index.slices.len(), 2);
    let e = &index.slices[1];
    let back = io::read_raster(&tmp.path().join(&e.raster), &tmp.path().join(&e.sidecar)).unwrap();
    let orig = carpet.slices[1].intensity();
    assert_eq!(back.grid, orig.grid);
    assert_eq!(back.z, zt / 2.0);
    for (x, y) in back.values.iter().zip(&orig.values) {
        assert_eq!(*x, (*y as f32) as f64);
    }
}

#[test]
fn reimaged_talbot_length_matches_reimaged_pitch() {
    let cfg = OpticalConfig::dense_lattice();
    let relay = Reimaging::new(cfg.demagnification).unwrap();
    let pre = cfg.talbot_length_pre().unwrap();
    let post = cfg.talbot_length().unwrap();
    assert!((relay.talbot_length(pre) - post).abs() < 1e-9 * post);
    assert!((pre / UM - 2254.0).abs() < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn talbot_length_is_quadratic_in_pitch(a in 1e-6..1e-4f64, lambda in 3e-7..2e-6f64, s in 0.1..10.0f64) {
        let base = talbot_length(a, lambda).unwrap();
        let scaled = talbot_length(s * a, lambda).unwrap();
        prop_assert!((scaled / base - s * s).abs() < 1e-12 * s * s);
    }

    #[test]
    fn reimaging_scales_laterally_and_axially(m in 0.01..2.0f64, x in -1e-3..1e-3f64) {
        let r = Reimaging::new(m).unwrap();
        prop_assert!((r.lateral(x) - m * x).abs() <= 1e-15 * x.abs());
        prop_assert!((r.axial(x) - m * m * x).abs() <= 1e-15 * x.abs());
    }

    #[test]
    fn self_image_fidelity_is_symmetric(seed in any::<u64>(), dz in 1e-6..300e-6f64) {
        let arr = LatticeBeamArray::square(3, 8.0 * UM, W0, LAMBDA);
        let grid = GridSpec::square(128, W0 / 8.0).unwrap();
        let a = arr.field(grid, 0.0).unwrap().intensity();
        let mut b = arr.field(grid, dz).unwrap().intensity();
        // Multiplicative noise so the pair is not a clean image pair.
        let mut state = seed | 1;
        for v in b.values.iter_mut() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            *v *= 1.0 + 0.2 * ((state >> 11) as f64 / (1u64 << 53) as f64);
        }
        let ab = self_image_fidelity(&a, &b).unwrap();
        let ba = self_image_fidelity(&b, &a).unwrap();
        prop_assert!((ab.value - ba.value).abs() < 1e-12);
    }
}
