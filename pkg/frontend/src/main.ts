import { ConsoleApp } from "./app.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

new ConsoleApp({
  canvas: byId<HTMLCanvasElement>("arena"),
  status: byId("status"),
  events: byId("events"),
  report: byId("report"),
  scenarioSelect: byId<HTMLSelectElement>("scenario"),
  connectButton: byId<HTMLButtonElement>("connect"),
});
