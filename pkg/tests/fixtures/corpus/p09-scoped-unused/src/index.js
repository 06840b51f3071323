import core from '@scope/core/sub';
const pad = require('left/x');
// require('ghost')
const s = "require('@scope/util')";
