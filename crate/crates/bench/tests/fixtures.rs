use kleinbarrier::{classify_mode, Zone};
use kleinbarrier_bench::{mixed_modes, reference_setup, tunneling_modes};

#[test]
fn tunneling_fixture_stays_inside_the_zone() {
    let s = reference_setup();
    let modes = tunneling_modes(&s, 64);
    assert_eq!(modes.len(), 64);
    assert!(modes
        .iter()
        .all(|m| classify_mode(&s, m) == Zone::Tunneling));
}

#[test]
fn mixed_fixture_covers_three_zones() {
    let s = reference_setup();
    let zones: Vec<Zone> = mixed_modes(&s, 64)
        .iter()
        .map(|m| classify_mode(&s, m))
        .collect();
    for z in [Zone::Klein, Zone::Tunneling, Zone::AboveBarrier] {
        assert!(zones.contains(&z), "{z:?} missing");
    }
}
