//! The bundled venue databases: ontology summary, constraint queries and a
//! few sampled scenarios as a human tester would read them.
//!
//! ```text
//! cargo run -p multidm --example domain_queries
//! ```

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use multidm::domain::{render_task_text, sample_task, Database};

fn main() -> multidm::Result<()> {
    for db in [Database::restaurants(), Database::hotels()] {
        let ont = &db.ontology;
        println!("{}: {} venues", ont.domain, db.entities.len());
        for slot in &ont.constraint_slots {
            println!("  {:<10} {}", slot.name, slot.values.join(", "));
        }
    }

    let db = Database::restaurants();
    let query: BTreeMap<String, String> =
        [("cuisine", "thai"), ("area", "centre")].map(|(k, v)| (k.to_string(), v.to_string())).into();
    let names: Vec<&str> = db.matching_set(&query)?.iter().map(|i| db.entities[i].name.as_str()).collect();
    println!("\nthai in the centre: {}", names.join(", "));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("\nsampled scenarios:");
    for _ in 0..3 {
        let task = sample_task(&db, &mut rng);
        println!("- {}", render_task_text(&task, &db.ontology));
    }
    Ok(())
}
