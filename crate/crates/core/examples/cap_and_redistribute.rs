//! Integer apportionment and redistribution of shares a source cannot hold.

use srcalloc::allocation::{
    apportion, cap_and_redistribute, proportional_allocate, uniform_allocate, Candidate, Entry,
    WeightBasis,
};

fn main() -> srcalloc::Result<()> {
    println!(
        "apportion 100 by .6/.3: {:?}",
        apportion(100, &[0.6, 0.3], &[0, 1])
    );

    let a = Candidate::new("A", 20, 0.5);
    let b = Candidate::new("B", 200, 0.3);
    let c = Candidate::new("C", 200, 0.2);
    let sources = [&a, &b, &c];
    println!(
        "proportional, A capped at 20: {:?}",
        proportional_allocate(&sources, 100)?
    );

    let small = Candidate::new("C", 10, 0.2);
    let ample = [
        &Candidate::new("A", 1000, 0.5),
        &Candidate::new("B", 1000, 0.3),
        &small,
    ];
    println!(
        "uniform, C capped at 10: {:?}",
        uniform_allocate(&ample, 100)?
    );

    let raw = vec![
        Entry::new("A", 50),
        Entry::new("B", 30),
        Entry::new("C", 20),
    ];
    let tight = [
        &Candidate::new("A", 25, 0.5),
        &Candidate::new("B", 25, 0.3),
        &Candidate::new("C", 10, 0.2),
    ];
    let capped = cap_and_redistribute(&raw, &tight, WeightBasis::Similarity);
    let used: u64 = capped.iter().map(|e| e.amount).sum();
    println!("every cap binding: {capped:?} (used {used} of 100)");
    Ok(())
}
