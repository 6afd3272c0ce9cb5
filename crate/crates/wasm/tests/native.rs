use shelab_wasm::{green_profiles, simulate};

#[test]
fn engines_agree_on_profile() {
    let n = 101;
    let v = green_profiles(0.05, 1.0, n, 400, 8).unwrap();
    for i in 0..n {
        assert!((v[i] - v[n + i]).abs() < 1e-9, "x index {i}");
    }
    // away from the walls the free kernel is indistinguishable
    assert!((v[n + 32] - v[2 * n + 32]).abs() < 1e-6);
}

#[test]
fn field_and_norms_have_grid_shape() {
    let f = simulate(0.8, 0.1, 1.0, 0.0, 3, 40, 32).unwrap();
    assert_eq!(f.nt(), 41);
    assert_eq!(f.nx(), 33);
    assert_eq!(f.values().len(), 41 * 33);
    let norms = f.sobolev_norms(-1.0, 256).unwrap();
    assert_eq!(norms.len(), 41);
    assert_eq!(norms[0], 0.0);
    assert_eq!(f.jump_times().len(), f.jump_sizes().len());
}
