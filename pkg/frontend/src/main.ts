/** Browser bootstrap: mount the review app on #app. */

import { mountReviewApp } from './app.js';

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get('api') ?? 'http://127.0.0.1:8000';
const root = document.getElementById('app');
if (!root) {
  throw new Error('page is missing the #app container');
}
mountReviewApp(root, baseUrl);
