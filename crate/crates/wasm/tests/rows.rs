use twave_wasm::{orbit_rows, pde_rows, portrait_rows, profile_rows};

#[test]
fn portrait_is_unit_vectors() {
    let v = portrait_rows(2, 1.0, 1, 12).unwrap();
    assert_eq!(v.len() % 4, 0);
    assert!(!v.is_empty());
    for r in v.chunks(4) {
        assert!((r[2].hypot(r[3]) - 1.0).abs() < 1e-12);
    }
    assert!(portrait_rows(3, 1.0, 1, 12).is_err());
}

#[test]
fn orbit_ends_at_the_sink() {
    let v = orbit_rows(2, 1.0, 0.1).unwrap();
    assert!(v.len() / 2 <= 4000);
    let n = v.len();
    assert!((v[n - 2] - 1.0).abs() < 1e-6 && v[n - 1].abs() < 1e-6);
    assert!(v.chunks(2).all(|s| s[0] > 0.0));
}

#[test]
fn profile_columns_agree_in_the_tail() {
    let v = profile_rows(2, 1.0, 0.01, -8.0, 4.0, 25).unwrap();
    assert_eq!(v.len(), 75);
    let first = &v[..3];
    assert_eq!(first[0], -8.0);
    assert!((first[1] / first[2] - 1.0).abs() < 1e-3);
    assert!(profile_rows(2, 1.0, 0.01, 1.0, 0.0, 5).is_err());
}

#[test]
fn front_layout_and_speed() {
    let v = pde_rows(2, 1.0, 0.1, 0.1, 1.0, 0.25).unwrap();
    let (nx, ns) = (v[0] as usize, v[1] as usize);
    assert_eq!(ns, 5);
    assert_eq!(v.len(), 3 + nx + ns * (nx + 1));
    assert!((v[2] - 1.0).abs() < 0.01);
    assert_eq!(v[3], -30.0);
    let last_t = v[3 + nx + (ns - 1) * (nx + 1)];
    assert_eq!(last_t, 1.0);
    assert!(pde_rows(2, 1.0, 0.9, 0.1, 1.0, 0.25).is_err());
}
