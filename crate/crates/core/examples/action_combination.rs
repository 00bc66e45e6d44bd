//! How per-dimension choices become one system turn: priority rules cancel
//! conflicting actions, and the survivors are realised as acts and text.
//!
//! ```text
//! cargo run -p multidm --example action_combination
//! ```

use multidm::acts::{
    format_acts, CommFunction, DialogueAct, FeedbackAction, NBestList, SomAction, TaskAction, UserInputEvent,
};
use multidm::belief::init_belief;
use multidm::combiner::{combine, flatten_action_product};
use multidm::domain::Database;
use multidm::nlg::generate_utterance;

fn main() {
    let db = Database::restaurants();
    let ont = &db.ontology;
    let mut b = init_belief(ont);
    let heard =
        vec![DialogueAct::bare(CommFunction::Greet), DialogueAct::inform([("cuisine", "thai"), ("area", "centre")])];
    b.apply_event(&UserInputEvent::NBest(NBestList::certain(heard)), ont);

    let choices = [
        (TaskAction::InformSearch, FeedbackAction::AutoPositive, SomAction::ReturnGreet),
        (TaskAction::Recommend, FeedbackAction::FeedbackInformConfirm, SomAction::None),
        (TaskAction::Recommend, FeedbackAction::AutoNegativeInterpretation, SomAction::None),
        (TaskAction::RequestSlot("pricerange".into()), FeedbackAction::None, SomAction::ReturnBye),
    ];
    for (task, feedback, som) in choices {
        let r = combine(task.clone(), feedback, som, &b, &db);
        println!("task={task} feedback={feedback} som={som}");
        for c in &r.cancelled {
            println!("  cancelled {} by {}", c.action, c.rule);
        }
        println!("  acts: {}", format_acts(&r.acts));
        println!("  text: {}{}\n", generate_utterance(&r, ont), if r.ends_dialogue { "  [end]" } else { "" });
    }
    println!("one-dimensional action set: {} combined actions", flatten_action_product(ont).len());
}
