import { ApiClient } from "./api.js";
import { SwarmMapState } from "./mapState.js";
import { ConceptBrowser, SwarmMapScreen } from "./screens.js";

// Served at /ui/ by the main server; the API lives at the origin root.
const api = new ApiClient("");

function tabbed(root: HTMLElement): void {
  const browser = new ConceptBrowser(api);
  const map = new SwarmMapScreen(new SwarmMapState(api));

  const conceptTab = document.createElement("button");
  conceptTab.textContent = "Concepts";
  const mapTab = document.createElement("button");
  mapTab.textContent = "Swarm map";
  const nav = document.createElement("nav");
  nav.append(conceptTab, mapTab);
  const content = document.createElement("main");
  root.append(nav, content);

  const showConcepts = () => {
    map.stop();
    content.replaceChildren(browser.root);
    void browser.refresh();
  };
  const showMap = () => {
    content.replaceChildren(map.root);
    map.start();
  };
  conceptTab.addEventListener("click", showConcepts);
  mapTab.addEventListener("click", showMap);
  showConcepts();
}

tabbed(document.getElementById("app") as HTMLElement);
