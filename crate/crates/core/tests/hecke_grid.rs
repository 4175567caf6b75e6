use phimod::hecke::{kernel_intersection_check, HeckeData, SerreWeight};
use phimod::koszul::tor_map;
use phimod::localring::Case;

fn weights(p: u32) -> Vec<SerreWeight> {
    let mut out: Vec<SerreWeight> = SerreWeight::grid(p, Case::Unramified)
        .into_iter()
        .map(|r| SerreWeight::unram(p, r[0], r[1]).unwrap())
        .collect();
    out.extend(SerreWeight::grid(p, Case::Ramified).into_iter().map(|r| SerreWeight::ram(p, 1, r[0]).unwrap()));
    out
}

#[test]
fn surjinj_suite_p3() {
    for wt in weights(3) {
        let data = HeckeData::new(wt.clone()).unwrap();
        let k = wt.field();
        let tm = data.tminus(1);
        assert!(tm.is_surjective() && !tm.is_injective(), "{}", wt.label());
        assert!(data.tplus_is_injective(), "{}", wt.label());
        let tp = data.tplus(1);
        assert!(tor_map(&tp, 2).inverse(k).is_some(), "{}", wt.label());
        assert!(tor_map(&tp, 0).is_zero());
        assert!(tor_map(&tm, 2).is_zero());
        assert!(tor_map(&tm, 0).inverse(k).is_some());
    }
}

#[test]
fn kernel_intersections_p3() {
    for wt in weights(3) {
        let r = kernel_intersection_check(&wt).unwrap();
        assert!(r.pass(), "{r:?}");
    }
}

#[test]
fn presentations_p3() {
    for wt in weights(3) {
        let data = HeckeData::new(wt).unwrap();
        data.coker_presentation().unwrap();
        data.even_presentation().unwrap();
    }
}
