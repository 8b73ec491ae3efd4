use cmaoe_core::domains::{enumerate_questions, generate_instance, Domain, SizeParams};
use cmaoe_core::hcmaop::Property;
use cmaoe_core::rational::int;
use cmaoe_core::{engine, solve, SolveParams, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let instance = generate_instance(Domain::Tap, &SizeParams::tap(5, 10), 7)?;
    let (model, roles) = instance.build()?;
    let params = SolveParams::default();
    let solution = solve(&model, &params)?.assignment.ok_or("no feasible solution")?;

    let question = &enumerate_questions(&model, &roles, &solution)[0];
    let var = model.var_id(&question.variable).unwrap();
    let property = Property::fix(var, int(1), question.prompt.clone());
    let answer = engine::answer(&model, &solution, &property, Variant::Q, &params)?;
    let e = &answer.explanation;
    println!("{}: quality drops by {}, {} changes", question.prompt, e.summary.quality_diff, e.length);
    Ok(())
}
