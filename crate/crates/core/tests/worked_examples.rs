use mdsforge::decomp::{certify, decompose, involutory_certificate, involutory_member, CertRefusal};
use mdsforge::mdscheck::{is_involutory, is_mds, is_representative_mds};
use mdsforge::{DiagonalMatrix, Elem, Field, SquareMatrix};

fn gf16() -> Field {
    Field::parse("2^4/0x13").unwrap()
}

fn elems(f: &Field, v: &[u64]) -> Vec<Elem> {
    v.iter().map(|&c| f.elem(c).unwrap()).collect()
}

fn mds_4x4() -> SquareMatrix {
    SquareMatrix::from_codes(
        gf16(),
        &[&[0xd, 0x7, 0xa, 0x3], &[0x7, 0xd, 0x3, 0xa], &[0xa, 0x3, 0xd, 0x7], &[0x3, 0xa, 0x7, 0xd]],
    )
    .unwrap()
}

fn involutory_4x4() -> SquareMatrix {
    SquareMatrix::from_codes(
        gf16(),
        &[&[0xa, 0xc, 0x6, 0x1], &[0xc, 0xa, 0x1, 0x6], &[0x6, 0x1, 0xa, 0xc], &[0x1, 0x6, 0xc, 0xa]],
    )
    .unwrap()
}

fn shared_representative() -> SquareMatrix {
    SquareMatrix::from_codes(
        gf16(),
        &[&[1, 1, 1, 1], &[1, 0xc, 0xd, 0x5], &[1, 0xd, 0x5, 0x7], &[1, 0x5, 0x7, 0x8]],
    )
    .unwrap()
}

#[test]
fn beta_is_a_root_of_the_modulus() {
    let f = gf16();
    let beta = f.elem(2).unwrap();
    assert_eq!(f.pow(beta, 4), f.elem(0x3).unwrap());
    assert_eq!(f.mul(beta, f.elem(8).unwrap()), f.elem(0x3).unwrap());
}

#[test]
fn mds_example_decomposes_as_printed() {
    let f = gf16();
    let m = mds_4x4();
    assert!(is_mds(&m));
    let t = decompose(&m).unwrap();
    assert_eq!(t.d1().diag(), elems(&f, &[0xd, 0x7, 0xa, 0x3]).as_slice());
    assert_eq!(t.d2().diag(), elems(&f, &[0x1, 0xf, 0xe, 0xc]).as_slice());
    assert_eq!(t.m1(), &shared_representative());
    assert_eq!(t.compose(), m);
    assert!(is_representative_mds(t.m1()).unwrap());
}

#[test]
fn mds_example_forward_direction() {
    let f = gf16();
    let d1 = DiagonalMatrix::new(f.clone(), elems(&f, &[0xd, 0x7, 0xa, 0x3])).unwrap();
    let d2 = DiagonalMatrix::new(f.clone(), elems(&f, &[0x1, 0xf, 0xe, 0xc])).unwrap();
    assert_eq!(shared_representative().sandwich(&d1, &d2).unwrap(), mds_4x4());
    assert!(!is_involutory(&mds_4x4()));
}

#[test]
fn involutory_example_shares_the_representative() {
    let f = gf16();
    let m = involutory_4x4();
    assert!(is_involutory(&m));
    assert!(is_mds(&m));
    let t = decompose(&m).unwrap();
    assert_eq!(t.m1(), &shared_representative());
    assert_eq!(t.d1().diag(), elems(&f, &[0xa, 0xc, 0x6, 0x1]).as_slice());
    assert_eq!(t.d2().diag(), elems(&f, &[0x1, 0xf, 0xe, 0xc]).as_slice());
}

#[test]
fn printed_inverse_of_the_representative() {
    let inv = SquareMatrix::from_codes(
        gf16(),
        &[&[0x8, 0xf, 0x7, 0x1], &[0xf, 0xf, 0x4, 0x4], &[0x7, 0x4, 0x7, 0x4], &[0x1, 0x4, 0x4, 0x1]],
    )
    .unwrap();
    assert_eq!(shared_representative().inverse().unwrap(), inv);
}

#[test]
fn certificate_and_member_reproduce_the_involutory_example() {
    let f = gf16();
    let m1 = shared_representative();
    let cert = involutory_certificate(&m1).unwrap().expect("certificate exists");
    assert_eq!(cert.alphas(), elems(&f, &[0xa, 0x8, 0x2, 0xc]).as_slice());
    let m = involutory_member(&m1, &cert, &elems(&f, &[0xc, 0x6, 0x1])).unwrap();
    assert_eq!(m, involutory_4x4());
    assert!(is_involutory(&m));
    assert_eq!(cert.sign_variants().len(), 1);
}

#[test]
fn refusal_names_first_failed_condition() {
    // Over F_8 every nonzero element is a residue, so refusals are pairwise.
    let f = Field::binary(3).unwrap();
    let mut refused = 0;
    for a in 2..8u64 {
        for b in 2..8u64 {
            let m1 = SquareMatrix::from_codes(f.clone(), &[&[1, 1, 1], &[1, a, b], &[1, b, a]]).unwrap();
            if m1.is_singular() {
                continue;
            }
            match certify(&m1).unwrap() {
                Ok(_) => {}
                Err(CertRefusal::NonQrDiagonal { .. }) => panic!("characteristic 2 has no non-residues"),
                Err(_) => refused += 1,
            }
        }
    }
    assert!(refused > 0);
}
