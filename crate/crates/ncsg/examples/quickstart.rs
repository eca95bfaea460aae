//! One full authentication round on the default preset, library-only.

use ncsg::protocols::{self, presets, Verdict};
use rand::SeedableRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = presets::perm6()?;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);

    let key = protocols::keygen(&params, &mut rng)?;
    let (x, state) = protocols::challenge(&params, &mut rng)?;
    let w = protocols::respond(&params, &key, &x)?;
    let verdict = protocols::verify(&params, &state, key.public(), &w)?;

    println!("public key: {}", key.public());
    println!("challenge:  {x}");
    println!("verdict:    {verdict:?}");
    assert_eq!(verdict, Verdict::Accept);
    Ok(())
}
