/** DOM wiring: chat/command pane, turn history, undo, export, banners. */

import { CadClient, ScriptRecord } from "./api";
import { SessionStore, ViewState } from "./state";
import { Viewer } from "./viewer";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function mountApp(root: HTMLElement, serviceUrl: string) {
  const client = new CadClient(serviceUrl);
  const store = new SessionStore(client);

  const layout = el("div", "layout");
  const viewerPane = el("div", "viewer-pane");
  const sidePane = el("div", "side-pane");
  layout.append(viewerPane, sidePane);
  root.appendChild(layout);

  const banner = el("div", "banner hidden");
  const history = el("div", "history");
  const form = el("form", "turn-form");
  const instructionInput = el("input") as HTMLInputElement;
  instructionInput.placeholder = "describe the edit (free text)...";
  const scriptInput = el("textarea") as HTMLTextAreaElement;
  scriptInput.placeholder = "manual edit script (JSON record), optional";
  scriptInput.rows = 5;
  const submit = el("button", "", "send turn") as HTMLButtonElement;
  const undoButton = el("button", "", "undo") as HTMLButtonElement;
  undoButton.type = "button";
  const exportSelect = el("select") as HTMLSelectElement;
  for (const kind of ["dsl", "json", "st", "gpl"]) {
    const option = el("option", "", kind) as HTMLOptionElement;
    option.value = kind;
    exportSelect.appendChild(option);
  }
  const exportButton = el("button", "", "export") as HTMLButtonElement;
  exportButton.type = "button";
  form.append(instructionInput, scriptInput, submit);
  sidePane.append(banner, history, form, undoButton, exportSelect, exportButton);

  const viewer = new Viewer(viewerPane);

  store.subscribe((state: ViewState) => {
    banner.textContent = state.banner ?? "";
    banner.classList.toggle("hidden", state.banner === null);
    submit.disabled = state.pending;
    undoButton.disabled = state.pending || state.turnLog.length === 0;
    history.replaceChildren(
      ...state.turnLog.map((entry, index) => {
        const line = el(
          "div",
          "history-entry",
          `${index}. ${entry.instruction} [ops ${entry.editedOps.join(", ") || "-"}]` +
            (entry.total === null ? "" : ` reward ${entry.total.toFixed(3)}`),
        );
        return line;
      }),
    );
    viewer.show(state.mesh, state.highlighted);
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    let script: ScriptRecord | undefined;
    if (scriptInput.value.trim()) {
      try {
        script = JSON.parse(scriptInput.value) as ScriptRecord;
      } catch (error) {
        banner.textContent = `bad script JSON: ${error}`;
        banner.classList.remove("hidden");
        return;
      }
    }
    void store.submitTurn(instructionInput.value, script);
  });
  undoButton.addEventListener("click", () => void store.undoTurn());
  exportButton.addEventListener("click", async () => {
    const text = await store.exportModel(exportSelect.value);
    if (text === null) return;
    const blob = new Blob([text], { type: "text/plain" });
    const anchor = el("a") as HTMLAnchorElement;
    anchor.href = URL.createObjectURL(blob);
    anchor.download = `model.cad.${exportSelect.value}`;
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  });

  void store.start("manual", "dsl");
  return { store, viewer };
}
