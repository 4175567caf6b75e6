use phimod::field::{Elem, Fq};
use phimod::flmod::{dual, dual_map, hom_basis, map_factor, random_module, submodule_generated, FLModule, ModuleMap};
use phimod::koszul::{les_check, tor_dims, tor_map};
use phimod::linalg::Mat;
use phimod::phi::{pullback, pullback_map, TwistSpec};
use proptest::prelude::*;

fn field(p: u32, f: u32) -> Fq {
    Fq::new(p, f).unwrap()
}

/// Linear combination of a basis of `Hom_A(m, n)` with coefficients taken from `coeffs`.
fn random_hom(m: &FLModule, n: &FLModule, coeffs: &[u8]) -> ModuleMap {
    let order = m.field().order();
    let mut f = ModuleMap::zero(m, n);
    for (h, &c) in hom_basis(m, n).iter().zip(coeffs.iter().cycle()) {
        f = f.add(&h.scaled((c as usize % order) as Elem));
    }
    f
}

fn random_vectors(k: &Fq, dim: usize, count: usize, coeffs: &[u8]) -> Vec<Vec<Elem>> {
    let order = k.order();
    (0..count)
        .map(|j| (0..dim).map(|i| (coeffs[(j * dim + i) % coeffs.len()] as usize % order) as Elem).collect())
        .collect()
}

fn small_field() -> impl Strategy<Value = Fq> {
    prop_oneof![Just((2, 1)), Just((3, 1)), Just((2, 2))].prop_map(|(p, f)| field(p, f))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank_plus_nullity(k in small_field(), rows in 1usize..7, cols in 1usize..7, data in prop::collection::vec(any::<u8>(), 49)) {
        let order = k.order();
        let a = Mat::from_fn(rows, cols, |i, j| (data[i * 7 + j] as usize % order) as Elem);
        let ker = a.kernel(&k);
        prop_assert_eq!(a.rank(&k) + ker.cols(), cols);
        prop_assert!(a.mul(&k, &ker).is_zero());
        prop_assert_eq!(a.transpose().rank(&k), a.rank(&k));
    }

    #[test]
    fn random_modules_are_valid(k in small_field(), d in 1usize..4, dim in 0usize..8, seed in any::<u64>()) {
        let m = random_module(&k, d, dim, seed);
        prop_assert!(m.validate().is_ok());
        prop_assert_eq!(m.dim(), dim);
        prop_assert!(dual(&m).validate().is_ok());
    }

    #[test]
    fn tor_euler_sum_vanishes(k in small_field(), d in 1usize..4, dim in 1usize..8, seed in any::<u64>()) {
        let dims = tor_dims(&random_module(&k, d, dim, seed));
        prop_assert_eq!(dims.len(), d + 1);
        let chi: i64 = dims.iter().enumerate().map(|(i, &h)| if i % 2 == 0 { h as i64 } else { -(h as i64) }).sum();
        prop_assert_eq!(chi, 0);
        prop_assert!(dims[0] >= 1 && dims[d] >= 1);
    }

    #[test]
    fn tor_duality(k in small_field(), d in 1usize..4, dim in 1usize..8, seed in any::<u64>()) {
        let m = random_module(&k, d, dim, seed);
        let mut back = tor_dims(&dual(&m));
        back.reverse();
        prop_assert_eq!(tor_dims(&m), back);
    }

    #[test]
    fn factorization_is_exact(k in small_field(), dm in 1usize..6, dn in 1usize..6, seed in any::<u64>(), coeffs in prop::collection::vec(any::<u8>(), 8)) {
        let m = random_module(&k, 2, dm, seed);
        let n = random_module(&k, 2, dn, seed.rotate_left(17));
        let f = random_hom(&m, &n, &coeffs);
        prop_assert!(f.is_linear());
        let fac = map_factor(&f);
        let r = f.rank();
        prop_assert_eq!(fac.kernel.source().dim() + r, dm);
        prop_assert_eq!(fac.image.source().dim(), r);
        prop_assert_eq!(fac.cokernel.target().dim() + r, dn);
        prop_assert!(fac.kernel.is_injective() && fac.kernel.then(&f).mat().is_zero());
        prop_assert!(fac.image.is_injective() && fac.coimage.is_surjective());
        prop_assert!(fac.cokernel.is_surjective() && f.then(&fac.cokernel).mat().is_zero());
        prop_assert_eq!(fac.coimage.then(&fac.image).mat().clone(), f.mat().clone());
        for g in [&fac.kernel, &fac.coimage, &fac.image, &fac.cokernel] {
            prop_assert!(g.source().validate().is_ok() && g.target().validate().is_ok() && g.is_linear());
        }
    }

    #[test]
    fn dual_reverses_composition(k in small_field(), seed in any::<u64>(), coeffs in prop::collection::vec(any::<u8>(), 8)) {
        let m = random_module(&k, 2, 3, seed);
        let n = random_module(&k, 2, 4, seed ^ 0x5a5a);
        let p = random_module(&k, 2, 3, seed.wrapping_add(7));
        let f = random_hom(&m, &n, &coeffs);
        let g = random_hom(&n, &p, &coeffs[3..]);
        prop_assert!(dual_map(&f).is_linear());
        prop_assert_eq!(dual_map(&f.then(&g)).mat().clone(), dual_map(&g).then(&dual_map(&f)).mat().clone());
    }

    #[test]
    fn tor_is_functorial(k in small_field(), seed in any::<u64>(), coeffs in prop::collection::vec(any::<u8>(), 8)) {
        let m = random_module(&k, 2, 4, seed);
        let n = random_module(&k, 2, 5, seed ^ 0xa5a5);
        let p = random_module(&k, 2, 4, seed.wrapping_add(11));
        let f = random_hom(&m, &n, &coeffs);
        let g = random_hom(&n, &p, &coeffs[2..]);
        for i in 0..=2 {
            prop_assert_eq!(tor_map(&f.then(&g), i), tor_map(&g, i).mul(&k, &tor_map(&f, i)));
            prop_assert!(tor_map(&ModuleMap::identity(&m), i).is_injective(&k));
        }
    }

    #[test]
    fn long_exact_sequence_of_random_submodule(k in small_field(), d in 1usize..4, dim in 1usize..8, seed in any::<u64>(), coeffs in prop::collection::vec(any::<u8>(), 16)) {
        let n = random_module(&k, d, dim, seed);
        let inc = submodule_generated(&n, &random_vectors(&k, dim, 1 + coeffs[0] as usize % 2, &coeffs[1..]));
        let report = les_check(&inc).unwrap();
        prop_assert!(report.exact);
        for (i, &(a, b, c)) in report.dims.iter().enumerate() {
            prop_assert_eq!(a, tor_dims(inc.source())[i]);
            prop_assert!(b <= a + c);
        }
    }

    #[test]
    fn pullback_scales_dimension_and_keeps_tor(p in prop_oneof![Just(2u32), Just(3)], q in 2u32..4, d in 1usize..3, dim in 1usize..5, seed in any::<u64>()) {
        let k = field(p, 1);
        let t = TwistSpec::qpow(d, q);
        let m = random_module(&k, d, dim, seed);
        let pm = pullback(&t, &m);
        prop_assert!(pm.validate().is_ok());
        prop_assert_eq!(pm.dim(), t.rank() * dim);
        prop_assert_eq!(tor_dims(&pm), tor_dims(&m));
    }

    #[test]
    fn pullback_is_exact(seed in any::<u64>(), coeffs in prop::collection::vec(any::<u8>(), 8)) {
        let k = field(2, 1);
        let t = TwistSpec::qpow(2, 2);
        let m = random_module(&k, 2, 3, seed);
        let n = random_module(&k, 2, 4, seed.rotate_left(5));
        let f = random_hom(&m, &n, &coeffs);
        let pf = pullback_map(&t, &f);
        prop_assert!(pf.is_linear());
        prop_assert_eq!(pf.rank(), t.rank() * f.rank());
        prop_assert_eq!(pf.is_injective(), f.is_injective());
        prop_assert_eq!(pf.is_surjective(), f.is_surjective());
    }
}
