// Bootstrapping: menu DOM, keyboard state, the 5 Hz game loop, the dilemma
// modal, and screen switching. All rules live in GameClient.

import { HttpApi } from './api.js';
import { GameClient, type KeyState } from './game.js';
import { drawBlueprint, drawGame } from './render.js';

const api = new HttpApi('');
const client = new GameClient(api, window.sessionStorage);

const canvas = document.getElementById('view') as HTMLCanvasElement;
const ctx = canvas.getContext('2d')!;
const menuEl = document.getElementById('menu')!;
const optionsEl = document.getElementById('options')!;
const modalEl = document.getElementById('modal')!;
const promptTextEl = document.getElementById('prompt-text')!;
const choicesEl = document.getElementById('choices')!;
const bannerEl = document.getElementById('banner')!;
const nameEl = document.getElementById('player-name') as HTMLInputElement;
const avatarEl = document.getElementById('avatar') as HTMLSelectElement;
const volumeEl = document.getElementById('volume') as HTMLInputElement;

const keys: KeyState = { up: false, down: false, left: false, right: false };
let shownPrompt: string | null = null;

function fitCanvas(): void {
  canvas.width = window.innerWidth;
  canvas.height = window.innerHeight;
}
window.addEventListener('resize', fitCanvas);
fitCanvas();

const KEYMAP: Record<string, keyof KeyState> = {
  KeyW: 'up', ArrowUp: 'up',
  KeyS: 'down', ArrowDown: 'down',
  KeyA: 'left', ArrowLeft: 'left',
  KeyD: 'right', ArrowRight: 'right',
};

window.addEventListener('keydown', (e) => {
  const k = KEYMAP[e.code];
  if (k) keys[k] = true;
});
window.addEventListener('keyup', (e) => {
  const k = KEYMAP[e.code];
  if (k) keys[k] = false;
});
canvas.addEventListener('wheel', (e) => {
  if (client.phase === 'roaming' || client.phase === 'prompted') {
    client.wheelZoom(e.deltaY);
    e.preventDefault();
  }
});

document.getElementById('play')!.addEventListener('click', async () => {
  const name = nameEl.value.trim() || 'player';
  const ok = await client.start(name, avatarEl.value, 'epolis-sample');
  if (!ok) showBanner(client.banner ?? 'connection failed');
});

document.getElementById('toggle-options')!.addEventListener('click', () => {
  optionsEl.classList.toggle('hidden');
});
volumeEl.addEventListener('input', () => {
  client.volume = Number(volumeEl.value) / 100;
});
document.getElementById('again')!.addEventListener('click', () => {
  client.leaveToMenu();
  window.location.reload();
});

function showBanner(text: string): void {
  bannerEl.textContent = text;
  bannerEl.classList.remove('hidden');
  setTimeout(() => bannerEl.classList.add('hidden'), 4000);
}

function syncModal(): void {
  if (client.phase === 'prompted' && client.prompt) {
    if (shownPrompt !== client.prompt.question) {
      shownPrompt = client.prompt.question;
      promptTextEl.textContent = client.prompt.prompt;
      choicesEl.innerHTML = '';
      for (const choice of client.prompt.choices) {
        const btn = document.createElement('button');
        btn.textContent = `${choice.key}. ${choice.text}`;
        btn.addEventListener('click', () => void client.answer(choice.key, Date.now()));
        choicesEl.appendChild(btn);
      }
    }
    modalEl.classList.remove('hidden');
  } else {
    shownPrompt = null;
    modalEl.classList.add('hidden');
  }
}

function syncScreens(): void {
  menuEl.classList.toggle('hidden', client.phase !== 'menu');
  canvas.classList.toggle('hidden', client.phase === 'menu');
  document.getElementById('blueprint-bar')!.classList.toggle('hidden', client.phase !== 'completed');
  syncModal();
}

setInterval(() => {
  void client.tick(Date.now(), keys);
}, 50);

function frame(): void {
  syncScreens();
  if (client.phase === 'completed') {
    drawBlueprint(ctx, client);
  } else if (client.phase !== 'menu') {
    drawGame(ctx, client);
  }
  requestAnimationFrame(frame);
}

void (async () => {
  const restored = await client.resume().catch(() => false);
  if (!restored) client.leaveToMenu();
  requestAnimationFrame(frame);
})();
