use lkhol::classify::match_algebra;
use lkhol::curvspace::{param_decode, param_encode};
use lkhol::symspace::{canonical_pair, symspace_report, SymFamily};

fn instances() -> Vec<(SymFamily, usize, usize)> {
    let mut out = vec![(SymFamily::A, 0, 0), (SymFamily::B, 0, 0), (SymFamily::C, 0, 0), (SymFamily::D, 1, 0), (SymFamily::E, 1, 0)];
    for n in 1..=3 {
        for m in 0..=n {
            out.push((SymFamily::F, n, m));
        }
    }
    out
}

#[test]
fn curvature_decodes_to_valid_parameters() {
    for (f, n, m) in instances() {
        let p = canonical_pair(f, n, m).unwrap();
        let param = param_decode(&p.r).unwrap();
        param.check(1e-10).unwrap();
        let back = param_encode(&param).unwrap();
        let err = p.r.values.iter().zip(&back.values).map(|(x, y)| (x - y).camax()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{f:?} n={n} m={m}: round trip {err:e}");
    }
}

#[test]
fn holonomy_of_each_pair_is_classified() {
    for (f, n, m) in instances() {
        let p = canonical_pair(f, n, m).unwrap();
        let res = match_algebra(&p.g);
        println!("{f:?} n={n} m={m}: {:?}", res.family());
        assert!(res.family().is_some(), "{f:?} n={n} m={m}: {res:?}");
    }
}

#[test]
fn calabi_yau_exactly_for_abde() {
    for (f, n, m) in instances() {
        let r = symspace_report(&canonical_pair(f, n, m).unwrap(), Some(f), Some(m)).unwrap();
        assert!(r.jacobi && r.g_equals_rmm, "{f:?} n={n} m={m}");
        let expect = matches!(f, SymFamily::A | SymFamily::B | SymFamily::D | SymFamily::E);
        assert_eq!(r.calabi_yau, expect, "{f:?} n={n} m={m}");
    }
}
