// DOM wiring for the chat page: input box, per-message mode switch,
// turn list, retry controls, health badge.

import { HttpTransport, MODES, Mode } from "./api.js";
import { Conversation, ConversationTurn } from "./conversation.js";
import { renderTurn } from "./render.js";

function serverBase(): string {
  const param = new URLSearchParams(window.location.search).get("server");
  return param ?? window.location.origin;
}

const transport = new HttpTransport(serverBase());
const conversation = new Conversation(transport);

const messages = document.getElementById("messages") as HTMLDivElement;
const input = document.getElementById("query-input") as HTMLInputElement;
const sendButton = document.getElementById("send") as HTMLButtonElement;
const modeSelect = document.getElementById("mode") as HTMLSelectElement;
const statusDot = document.getElementById("status") as HTMLSpanElement;

for (const mode of MODES) {
  const option = document.createElement("option");
  option.value = mode;
  option.textContent = mode;
  modeSelect.appendChild(option);
}

function redraw(): void {
  messages.innerHTML = conversation.turns.map(renderTurn).join("");
  messages.querySelectorAll<HTMLButtonElement>("button.retry").forEach(
    (button, index) => {
      const errorTurns = conversation.turns.filter((t) => t.role === "error");
      const turn = errorTurns[index];
      if (turn) button.addEventListener("click", () => retry(turn));
    },
  );
  messages.scrollTop = messages.scrollHeight;
  const busy = conversation.pending;
  sendButton.disabled = busy;
  input.disabled = busy;
}

async function send(): Promise<void> {
  const text = input.value.trim();
  if (!text || conversation.pending) return;
  const mode = modeSelect.value as Mode;
  const promise = conversation.send(text, mode);
  redraw();
  const turn = await promise;
  // a failed send keeps the input so the user can edit and resend
  if (turn.role !== "error") input.value = "";
  redraw();
  input.focus();
}

async function retry(turn: ConversationTurn): Promise<void> {
  if (conversation.pending) return;
  await conversation.retry(turn);
  redraw();
}

sendButton.addEventListener("click", () => void send());
input.addEventListener("keydown", (event) => {
  if (event.key === "Enter") void send();
});

void transport.health().then((ok) => {
  statusDot.classList.add(ok ? "up" : "down");
  statusDot.title = ok ? "service reachable" : "service unreachable";
});

redraw();
input.focus();
