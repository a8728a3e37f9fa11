#include "agentos/system_agents.hpp"

namespace agentos {

namespace {

const char* const kAgentFormGuide = R"(Reply with one XML document and nothing else. Its shape:

<agents>
    <system_input>what the user will hand to the system</system_input>
    <system_output>
        <key>identifier</key>
        <description>what the system returns</description>
    </system_output>
    <global_variables>                      (optional)
        <variable>
            <key>identifier</key>
            <description>meaning</description>
            <value>constant value</value>
        </variable>
    </global_variables>
    <agent>                                 (one or more)
        <name>Readable Name</name>
        <description>one sentence</description>
        <instructions>system instructions; {key} inserts a global variable</instructions>
        <tools category="existing">         (tools already registered)
            <tool><name>tool_name</name><description>use</description></tool>
        </tools>
        <tools category="new">              (tools that must be written)
            <tool><name>tool_name</name><description>use</description></tool>
        </tools>
        <agent_input><key>identifier</key><description>meaning</description></agent_input>
        <agent_output><key>identifier</key><description>meaning</description></agent_output>
    </agent>
</agents>

Checks applied to your reply:
- system_output, agent_input and agent_output hold a single key and a single description.
- Every {key} used in instructions is declared under global_variables.
- Tools marked existing must already be registered; everything else goes under new.
- Agent names are distinct.
- With a single agent, its agent_output key equals the system_output key.
Prefer one agent unless the work clearly splits into separate areas of expertise.)";

const char* const kWorkflowFormGuide = R"(Reply with one XML document and nothing else. Its shape:

<workflow>
    <name>snake_case_name</name>
    <system_input><key>identifier</key><description>meaning</description></system_input>
    <system_output><key>identifier</key><description>meaning</description></system_output>
    <agents>
        <agent category="existing|new">
            <name>Readable Name</name>
            <description>one sentence</description>
            <tools>...</tools>              (optional)
        </agent>
    </agents>
    <global_variables>...</global_variables> (optional, as for agent forms)
    <events>
        <event>
            <name>on_start</name>
            <inputs><input><key>K</key><description>...</description></input></inputs>
            <outputs><output><key>K</key><description>...</description>
                <action><type>RESULT</type></action></output></outputs>
        </event>
        <event>
            <name>snake_case_name</name>
            <inputs>...</inputs>
            <task>what the agent must do; {key} inserts a global variable</task>
            <outputs>
                <output>
                    <key>identifier</key>
                    <description>meaning</description>
                    <condition>when to pick this output</condition>   (needed when there are several)
                    <action><type>RESULT|ABORT|GOTO</type><value>target event for GOTO</value></action>
                </output>
            </outputs>
            <listen><event>upstream_event</event></listen>
            <agent><name>Readable Name</name><model>model id</model></agent>
        </event>
    </events>
</workflow>

Rules:
- The first event is on_start. It has no task, listen or agent, takes the system input and passes it
  through unchanged as a RESULT.
- Every other event listens to at least one event and names its agent. It starts once all of the
  events it listens to have finished.
- Each input key is the system input or a RESULT output of some earlier event.
- RESULT publishes the value, ABORT stops the run, GOTO jumps back to the named event. A GOTO target
  must exist and must not itself listen to the event that jumps to it.
- Several outputs need conditions and at most one of them may be RESULT.
- The system_output key is produced by some RESULT output.
- Listening must not form a cycle; loops are written with GOTO. Add a max_iterations global variable
  to cap them.
- Agents marked existing must be registered; new agents will be created for you.
Typical layouts: branch on a condition with one output per case; fan out to several agents that all
listen to the same event and join them in one event that listens to all of them; or pair a worker
with a reviewer whose rejection GOTOs back to the worker.)";

}  // namespace

AgentDefinition agent_profiling_agent() {
    AgentDefinition a;
    a.name = "Agent Profiling Agent";
    a.description = "Turns a plain-language requirement into an agent form.";
    a.instructions = std::string("You design agents. Read the requirement and describe the agents that should "
                                 "satisfy it as a form.\n\n") +
                     kAgentFormGuide +
                     "\n\nIf your previous form was rejected, the problems are listed in the request. Fix all of "
                     "them and send the complete corrected form.";
    return a;
}

AgentDefinition workflow_profiling_agent() {
    AgentDefinition a;
    a.name = "Workflow Profiling Agent";
    a.description = "Turns a plain-language requirement into a workflow form.";
    a.instructions = std::string("You design event-driven workflows. Read the requirement and lay out the "
                                 "events, agents and data flow as a form.\n\n") +
                     kWorkflowFormGuide +
                     "\n\nIf your previous form was rejected, the problems are listed in the request. Fix all of "
                     "them and send the complete corrected form.";
    return a;
}

AgentDefinition tool_editor_agent() {
    AgentDefinition a;
    a.name = "Tool Editor Agent";
    a.description = "Writes and tests the tools a form asks for.";
    a.instructions =
        "You build tools. For each tool in the request, call create_tool with its name, description and "
        "parameters, delegating to a builtin primitive or supplying a script. Then call run_tool with "
        "realistic arguments to prove it works. If the run fails, read the error, fix the tool and run it "
        "again. When every tool runs cleanly, reply with a short summary and no tool call.";
    a.tool_names = {"list_tools", "create_tool", "run_tool", "delete_tool"};
    return a;
}

AgentDefinition agent_editor_agent() {
    AgentDefinition a;
    a.name = "Agent Editor Agent";
    a.description = "Registers the agents a form describes.";
    a.instructions =
        "You register agents. For each agent in the request call create_agent with its name, description, "
        "instructions and comma-separated tool names. When the request describes more than one agent, "
        "also call create_orchestrator_agent with all of their names so a single entry point can route "
        "work between them. Reply with a short summary and no tool call once everything is registered.";
    a.tool_names = {"list_tools", "list_agents", "create_agent", "create_orchestrator_agent", "run_agent"};
    return a;
}

AgentDefinition workflow_editor_agent() {
    AgentDefinition a;
    a.name = "Workflow Editor Agent";
    a.description = "Registers a workflow form and the agents it introduces.";
    a.instructions =
        "You register workflows. First call create_agent for every agent the form marks as new, using its "
        "description as a starting point for the instructions and leaving tools empty unless the form lists "
        "some. Then call create_workflow with the complete form XML. Reply with a short summary and no tool "
        "call when done.";
    a.tool_names = {"list_agents", "list_workflows", "create_agent", "create_workflow", "run_workflow"};
    return a;
}

}  // namespace agentos
