// Registry of debugger-panel controls. Every control maps to exactly one
// protocol method; the link-check test walks this table against the method
// list, so a control can never silently drift off the protocol.

export interface ControlSpec {
  control: string;
  label: string;
  method: string;
}

export const DEBUGGER_CONTROLS: ControlSpec[] = [
  { control: "step-into", label: "Step into", method: "step" },
  { control: "step-over", label: "Step over", method: "step" },
  { control: "step-until-command", label: "Run step command", method: "stepUntil" },
  { control: "resume", label: "Resume", method: "resume" },
  { control: "restart-frame", label: "Restart frame", method: "restartFrame" },
  { control: "create-missing-method", label: "Create method", method: "createMissingMethod" },
  { control: "save-frame-method", label: "Save and restart", method: "recompileFrameMethod" },
];

export const PROTOCOL_METHODS = [
  "loadFile", "eval", "runTests", "listClasses", "methodSource",
  "defineMethod", "removeMethod", "inspect", "viewContent", "sessions",
  "stack", "step", "stepUntil", "resume", "restartFrame",
  "createMissingMethod", "recompileFrameMethod", "materializeTry",
  "setObjectBreakpoint", "clearBreakpoint", "registerStepCommand",
  "listStepCommands", "sendersOf", "implementorsOf", "journal",
  "rollbackTo", "shutdown",
] as const;
