#include "mutants.hpp"

#include <stdexcept>

namespace testing {

using namespace agentos;

namespace {

Event& event(WorkflowForm& f, const std::string& name) {
    for (auto& e : f.events) {
        if (e.name == name) return e;
    }
    throw std::runtime_error("fixture has no event " + name);
}

}  // namespace

NameSetView clean_workflow_registry() {
    NameSetView v;
    v.agents = {"Web Surfer Agent"};
    return v;
}

NameSetView clean_agent_registry() {
    NameSetView v;
    v.tools = {"visual_question_answering", "save_raw_docs_to_vector_db", "query_db"};
    return v;
}

std::vector<WorkflowMutant> workflow_mutants() {
    const std::string vote = "majority_vote_workflow.xml";
    const std::string wiki = "wiki_article_workflow.xml";
    std::vector<WorkflowMutant> m;
    m.push_back({"V1", "name with a space", vote, [](WorkflowForm& f) { f.name = "parallel math"; }, clean_workflow_registry()});
    {
        NameSetView reg = clean_workflow_registry();
        reg.workflows = {"parallel_math_solver_workflow"};
        m.push_back({"V1", "name already registered", vote, [](WorkflowForm&) {}, reg});
    }
    m.push_back({"V2", "on_start with a task", vote,
                 [](WorkflowForm& f) { event(f, "on_start").task = "do something"; }, clean_workflow_registry()});
    m.push_back({"V2", "on_start not first", vote,
                 [](WorkflowForm& f) { std::swap(f.events[0], f.events[1]); }, clean_workflow_registry()});
    m.push_back({"V3", "input nobody publishes", vote,
                 [](WorkflowForm& f) { event(f, "aggregate_solutions").inputs.push_back({"mystery_key", ""}); }, clean_workflow_registry()});
    m.push_back({"V3", "input published only downstream", wiki,
                 [](WorkflowForm& f) { event(f, "on_evaluate").inputs.push_back({"article", ""}); }, clean_workflow_registry()});
    m.push_back({"V4", "event without agent", vote,
                 [](WorkflowForm& f) { event(f, "solve_with_gpt4").agent.reset(); }, clean_workflow_registry()});
    m.push_back({"V5", "GOTO to unknown event", wiki,
                 [](WorkflowForm& f) { event(f, "on_evaluate").outputs[1].action.value = "on_nowhere"; }, clean_workflow_registry()});
    m.push_back({"V5", "GOTO to a listener", wiki,
                 [](WorkflowForm& f) { event(f, "on_evaluate").outputs[1].action.value = "on_write"; }, clean_workflow_registry()});
    m.push_back({"V6", "multi-output without condition", wiki,
                 [](WorkflowForm& f) { event(f, "on_evaluate").outputs[0].condition.reset(); }, clean_workflow_registry()});
    m.push_back({"V6", "two RESULT outputs", wiki,
                 [](WorkflowForm& f) {
                     auto& o = event(f, "on_evaluate").outputs[1];
                     o.action = Action{ActionType::result, ""};
                 },
                 clean_workflow_registry()});
    m.push_back({"V7", "system_output never published", vote,
                 [](WorkflowForm& f) { f.system_output[0].key = "unpublished_answer"; }, clean_workflow_registry()});
    m.push_back({"V8", "event agent unknown", vote,
                 [](WorkflowForm& f) { event(f, "solve_with_claude").agent->name = "Ghost Agent"; }, clean_workflow_registry()});
    m.push_back({"V8", "existing agent not registered", vote,
                 [](WorkflowForm& f) { f.agents[0].category = "existing"; }, clean_workflow_registry()});
    m.push_back({"V8", "task placeholder without global", vote,
                 [](WorkflowForm& f) { event(f, "solve_with_gpt4").task = "Solve it in {style}."; }, clean_workflow_registry()});
    m.push_back({"V9", "two system inputs", vote,
                 [](WorkflowForm& f) { f.system_input.push_back({"second_input", ""}); }, clean_workflow_registry()});
    m.push_back({"V10", "listen to unknown event", vote,
                 [](WorkflowForm& f) { event(f, "aggregate_solutions").listen.push_back("on_missing"); }, clean_workflow_registry()});
    m.push_back({"V10", "event listens to itself", wiki,
                 [](WorkflowForm& f) { event(f, "on_search").listen.push_back("on_search"); }, clean_workflow_registry()});
    return m;
}

std::vector<AgentMutant> agent_mutants() {
    const std::string davinci = "davinci_agent_form.xml";
    const std::string fin = "financial_agents_form.xml";
    std::vector<AgentMutant> m;
    m.push_back({"A1", "two agent_output pairs", davinci,
                 [](AgentForm& f) { f.agents[0].agent_output.push_back({"extra_key", ""}); }, clean_agent_registry()});
    m.push_back({"A1", "no system_output", davinci, [](AgentForm& f) { f.system_output.clear(); },
                 clean_agent_registry()});
    m.push_back({"A2", "instructions reference missing global", davinci,
                 [](AgentForm& f) { f.agents[0].instructions += " Use {palette}."; }, clean_agent_registry()});
    m.push_back({"A3", "existing tool not registered", davinci, [](AgentForm&) {}, NameSetView{}});
    m.push_back({"A4", "duplicate agent name", fin,
                 [](AgentForm& f) { f.agents[1].name = f.agents[0].name; }, clean_agent_registry()});
    m.push_back({"A5", "single agent output key differs", davinci,
                 [](AgentForm& f) { f.agents[0].agent_output[0].key = "image_report"; }, clean_agent_registry()});
    return m;
}

}  // namespace testing
